import os

import pytest

import visrank


def test_version():
    assert visrank.__version__ == "0.1.0"


def test_normalize_token():
    assert visrank.normalize_token(" Way ") == "way"
    assert visrank.normalize_token("24:7") == "24:7"


def test_cascade_names():
    names = visrank.cascade_names()
    assert names[0] == "p0" and names[-1] == "p7" and len(names) == 8


def test_unigram_hand_counts():
    lm = visrank.UnigramModel.from_text("a b b a a")
    assert lm.prob("a") == 0.6
    assert lm.prob("b") == 0.4
    assert lm.count("a") == 3
    assert lm.prob("zzz") == lm.oov_floor()


def test_unigram_round_trip(tmp_path):
    lm = visrank.UnigramModel.from_text("street sign way way")
    path = str(tmp_path / "model.ulm")
    lm.save(path)
    back = visrank.UnigramModel.load(path)
    assert back.prob("way") == lm.prob("way")
    assert back.total() == 4


def test_cosine_hand_value():
    table = visrank.EmbeddingTable()
    table.insert("w", [1.0, 2.0, 2.0])
    table.insert("c", [2.0, 1.0, 2.0])
    assert abs(table.similarity("w", "c") - 8.0 / 9.0) < 1e-12
    assert table.similarity("w", "zzz") is None
    assert len(table) == 2 and table.dim() == 3


def test_conditional_table_hand_counts():
    records = []
    for i, (gold, label) in enumerate(
        [("way", "street"), ("way", "street"), ("stop", "street"), ("way", "sign")]
    ):
        r = visrank.EvalRecord()
        r.id = f"t{i}"
        r.gold = gold
        r.hypotheses = [visrank.Hypothesis(gold, 1.0)]
        r.contexts = [visrank.VisualContext(label, 0.5)]
        records.append(r)
    tdp = visrank.TdpTable.fit(records)
    assert tdp.prob("way", "street") == 2.0 / 3.0
    assert tdp.prob("way", "elephant") == tdp.floor()


def test_invalid_cascade_raises():
    with pytest.raises(ValueError):
        visrank.rerank(visrank.EvalRecord(), "p9")


def test_end_to_end(tmp_path):
    out = str(tmp_path / "bench")
    visrank.generate_bench(out, records=40, train_records=60)
    records = visrank.load_records(os.path.join(out, "dataset.jsonl"))
    assert len(records) == 40

    with open(os.path.join(out, "corpus.txt")) as f:
        lm = visrank.UnigramModel.from_text(f.read())
    emb = visrank.EmbeddingTable.load(os.path.join(out, "embeddings.vec"))
    tdp = visrank.TdpTable.fit(visrank.load_records(os.path.join(out, "train.jsonl")))

    baseline = [[h.word for h in r.hypotheses] for r in records]
    fused = []
    for r in records:
        scored = visrank.rerank(r, "p5", lm=lm, embeddings=emb, tdp=tdp)
        assert scored and {"word", "baseline", "combined", "stages"} <= scored[0].keys()
        fused.append([h["word"] for h in scored])

    base_report = visrank.evaluate(records, baseline, 3, label="p0")
    fused_report = visrank.evaluate(records, fused, 3, label="p5")
    assert base_report["full"]["total"] == 40
    assert fused_report["full"]["correct"] >= base_report["full"]["correct"]
    assert fused_report["list"]["total"] == 40  # gold is always generated within top-3


def test_pair_embeddings_separation():
    records = []
    for i in range(120):
        r = visrank.EvalRecord()
        r.id = f"p{i}"
        r.gold = "a" if i % 2 == 0 else "b"
        r.hypotheses = [visrank.Hypothesis(r.gold, 1.0)]
        r.contexts = [visrank.VisualContext("x" if i % 2 == 0 else "y", 0.9)]
        records.append(r)
    trained = visrank.train_pair_embeddings(records, dim=16, epochs=30, seed=3)
    assert trained.similarity("a", "x") > trained.similarity("a", "y")
    assert len(trained.epoch_losses) == 30
