"""Command-line surface: exit codes, output shapes, one-line failure causes."""

import json

import pytest

from medqa.cli import main
from medqa.corpus import QuoraRow, write_pairs
from medqa.embeddings import save_vectors
from medqa.fixtures import toy_corpus

TABLE_ROWS = [
    QuoraRow(130859, 209926, 209927,
             "How do you treat a cat with a cold?",
             "How can you cure a cat of a cold?", 1),
    QuoraRow(82425, 139763, 133638,
             "How much medical evidence is there in support of the claim weed causes cancer?",
             "Does weed give you lung cancer?", 1),
    QuoraRow(261370, 377490, 377491,
             "How can an allergy to sawdust be treated?",
             "How do you treat sawdust allergy?", 1),
]

DICTIONARY = """\
[diseases]
cold
cancer
lung cancer
[symptoms]
allergy
"""


@pytest.fixture(scope="module")
def toy_files(tmp_path_factory):
    """Pairs TSV + vectors file for the generated toy corpus."""
    root = tmp_path_factory.mktemp("toy")
    pairs, table = toy_corpus(seed=0)
    rows = [
        QuoraRow(i, 2 * i, 2 * i + 1, p.q1, p.q2, p.label)
        for i, p in enumerate(pairs)
    ]
    pairs_path = root / "pairs.tsv"
    pairs_path.write_text(write_pairs(rows), encoding="utf-8")
    vectors_path = root / "vectors.txt"
    save_vectors(table, vectors_path)
    config_path = root / "train.conf"
    config_path.write_text("epochs = 2\nhidden = 4\nbatch_size = 16\nseed = 3\n")
    return {"pairs": pairs_path, "vectors": vectors_path, "config": config_path}


class TestTrain:
    def test_toy_run_writes_model_and_loss_csv(self, toy_files, tmp_path, capsys):
        model = tmp_path / "model.npz"
        code = main([
            "--json", "train",
            "--config", str(toy_files["config"]),
            "--pairs", str(toy_files["pairs"]),
            "--vectors", str(toy_files["vectors"]),
            "--out", str(model),
        ])
        assert code == 0
        assert model.exists()
        payload = json.loads(capsys.readouterr().out)
        assert payload["epochs"] == 2
        assert payload["held_out_pairs"] == 20
        assert 0.0 <= payload["held_out_accuracy"] <= 1.0
        loss_lines = (tmp_path / "model.npz.loss.csv").read_text().strip().splitlines()
        assert loss_lines[0] == "epoch,loss"
        assert len(loss_lines) == 1 + 2

    def test_missing_vectors_file_names_the_path(self, toy_files, tmp_path, capsys):
        code = main([
            "train",
            "--pairs", str(toy_files["pairs"]),
            "--vectors", str(tmp_path / "nope.txt"),
            "--out", str(tmp_path / "m.npz"),
        ])
        assert code != 0
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "nope.txt" in err

    def test_bad_train_fraction_cites_the_field(self, toy_files, tmp_path, capsys):
        config = tmp_path / "bad.conf"
        config.write_text("train_fraction = 1.5\n")
        code = main([
            "train",
            "--config", str(config),
            "--pairs", str(toy_files["pairs"]),
            "--vectors", str(toy_files["vectors"]),
            "--out", str(tmp_path / "m.npz"),
        ])
        assert code != 0
        assert "train_fraction" in capsys.readouterr().err


@pytest.fixture(scope="module")
def model_path(toy_files, tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "model.npz"
    assert main([
        "train",
        "--config", str(toy_files["config"]),
        "--pairs", str(toy_files["pairs"]),
        "--vectors", str(toy_files["vectors"]),
        "--out", str(out),
    ]) == 0
    return out


class TestEval:
    def test_eval_reports_accuracy_json(self, toy_files, model_path, capsys):
        capsys.readouterr()
        code = main([
            "--json", "eval",
            "--model", str(model_path),
            "--vectors", str(toy_files["vectors"]),
            "--pairs", str(toy_files["pairs"]),
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) >= {"accuracy", "threshold", "n_correct", "n_total"}
        assert payload["n_total"] == 200

    def test_eval_missing_model_fails(self, toy_files, tmp_path, capsys):
        code = main([
            "eval",
            "--model", str(tmp_path / "absent.npz"),
            "--vectors", str(toy_files["vectors"]),
            "--pairs", str(toy_files["pairs"]),
        ])
        assert code != 0
        assert "absent.npz" in capsys.readouterr().err


class TestFilter:
    def test_table_fixture_keeps_all_three(self, tmp_path, capsys):
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text(write_pairs(TABLE_ROWS), encoding="utf-8")
        dictionary = tmp_path / "dict.txt"
        dictionary.write_text(DICTIONARY, encoding="utf-8")
        kept_path = tmp_path / "kept.tsv"
        code = main([
            "--json", "filter",
            "--pairs", str(pairs),
            "--dictionary", str(dictionary),
            "--out", str(kept_path),
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["rows_read"] == 3
        assert payload["rows_kept"] == 3
        assert kept_path.read_text(encoding="utf-8") == write_pairs(TABLE_ROWS)

    def test_non_medical_rows_dropped(self, tmp_path, capsys):
        rows = [QuoraRow(1, 2, 3, "How do I learn piano?", "Best piano tutorials?", 0)]
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text(write_pairs(rows), encoding="utf-8")
        dictionary = tmp_path / "dict.txt"
        dictionary.write_text(DICTIONARY, encoding="utf-8")
        code = main(["--json", "filter", "--pairs", str(pairs),
                     "--dictionary", str(dictionary)])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["rows_kept"] == 0


class TestQuery:
    def test_fixture_stack_graph_answer(self, capsys):
        code = main(["--json", "query", "What are the symptoms of cold?"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["source"] == "kg"
        assert "fever" in payload["text"]

    def test_no_kg_flag_forces_corpus_path(self, capsys):
        code = main(["--json", "query", "--no-kg", "What are the symptoms of cold?"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["source"] == "qa"
        assert len(payload["alternatives"]) <= 3

    def test_plain_output_has_source_prefix(self, capsys):
        code = main(["query", "What are the symptoms of cold?"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("[kg]")
        assert "fever" in out


class TestParser:
    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2

    def test_no_subcommand_exits_two(self):
        with pytest.raises(SystemExit):
            main([])
