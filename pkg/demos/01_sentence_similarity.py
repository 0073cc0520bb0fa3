"""
Scoring sentence pairs with the Siamese encoder
===============================================

Both sentences run through the same bidirectional-LSTM-with-attention
encoder; the score is exp(-L1 distance) between the two pooled vectors,
so 1.0 means "identical" and small values mean "far apart".
"""

import numpy as np

from medqa.embeddings import embed_sequence, random_table, tokenize
from medqa.encoder import encode, init_params
from medqa.similarity import manhattan_similarity, rank_against_corpus, score_pair

# A throwaway vocabulary with seeded random vectors. Real use loads a
# vectors file; the scoring math is identical.
vocab = "how do you treat cure a cold flu headache what causes my why is".split()
table = random_table(vocab, dim=16, seed=4)
params = init_params(hidden=8, embedding_dim=16, seed=0)

# Tokenization keeps letters, digits and apostrophes; everything else splits.
sentence = "How do you TREAT a cold?"
print("tokens:", tokenize(sentence).tokens)

# score_pair is symmetric and deterministic.
pair = score_pair(params, table, "how do you treat a cold", "how do you cure a cold", max_len=10)
print("treat-vs-cure similarity:", round(pair.similarity, 4))

same = score_pair(params, table, sentence, sentence, max_len=10)
print("identical sentences score:", same.similarity)

# The score really is the closed form over the two pooled vectors.
v1, m1 = embed_sequence(table, tokenize("how do you treat a cold"), 10)
v2, m2 = embed_sequence(table, tokenize("why is my headache worse"), 10)
a = encode(params, v1, m1).pooled
b = encode(params, v2, m2).pooled
by_hand = float(np.exp(-np.abs(a - b).sum()))
print("closed form matches:", np.isclose(by_hand, manhattan_similarity(a, b)))

# Ranking a small corpus returns (index, similarity) pairs, best first.
# With untrained weights the order is arbitrary; the training demo shows
# the encoder learning to put paraphrases on top.
corpus = [
    "how do you cure a cold",
    "what causes flu",
    "why is my headache worse at night",
]
for index, similarity in rank_against_corpus(params, table, "how to treat a cold", corpus, k=3, max_len=10):
    print(f"  {similarity:.4f}  {corpus[index]}")
