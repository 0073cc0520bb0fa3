"""
The question-pair data pipeline
===============================

From a raw tab-separated dump of labeled question pairs to a balanced
medical training set: parse (forgivingly), filter by dictionary mention,
sample with an exact 1:1 label split.
"""

from medqa.corpus import (
    filter_medical,
    load_qa_records,
    parse_pairs,
    sample_balanced,
    write_pairs,
)
from medqa.entities import MedicalDictionary, build_automaton

RAW = "\t".join(["id", "qid1", "qid2", "question1", "question2", "is_duplicate"]) + """
1\t1\t2\tHow do you treat a cat with a cold?\tHow can you cure a cat of a cold?\t1
2\t3\t4\tHow do I learn piano?\tBest piano tutorials?\t0
3\t5\t6\tIs a fever dangerous?\tShould I worry about a fever?\t1
4\t7\t8\tbroken\trow\tnot-a-label
5\t9\t10\tDoes stress cause headaches?\tCan stress give you a headache?\t1
6\t11\t12\tBest hiking trails?\tWhere should I hike?\t0
"""

rows, errors = parse_pairs(RAW)
print(f"parsed {len(rows)} rows, {len(errors)} rejected:")
for err in errors:
    print("  ", err)

# Keep a row when either question mentions a dictionary term.
dictionary = MedicalDictionary(diseases={"cold"}, symptoms={"fever", "headache"})
kept, report = filter_medical(rows, dictionary, build_automaton(dictionary))
print(f"\nmedical subset: {report.rows_kept} of {report.rows_read} rows")
print("term hit counts:", report.keyword_hits)

# Balanced sampling is seeded and exact: n/2 of each label or an error.
sample = sample_balanced(rows, n=4, seed=0)
print("\nsampled labels:", [r.is_duplicate for r in sample])

# Serialization round-trips, embedded tabs and newlines included.
assert parse_pairs(write_pairs(kept))[0] == kept

# The retrieval corpus is JSON lines; bad lines are reported, not fatal.
result = load_qa_records([
    '{"question": "Is paracetamol safe?", "answer": "At label doses, yes.", "tags": ["drugs"], "source": "webmd"}',
    'not json at all',
])
print(f"\nloaded {len(result.records)} QA records, errors: {result.errors}")
print("pooled tags:", result.tags)
