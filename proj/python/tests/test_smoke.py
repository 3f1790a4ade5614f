"""End-to-end smoke tests for the python bindings: synth a small corpus,
analyze it closed-loop, and poke the metric and conversion helpers."""

import json
import math

import pytest

import ibrkit

CONFIG = {
    "seed": 1234,
    "window_hours": 24,
    "target_top1pct_share": 0.6,
    "pareto_cap": 40000,
    "campaigns": [
        {
            "kind": "persistent_scanner",
            "sources": 6,
            "ports": [23, 2323, 80, 8080, 5555],
            "packets_per_hour": 30000,
        },
        {"kind": "bursty_spike", "sources": 1, "spike_hour": 10, "spike_packets": 1100000},
        {"kind": "backscatter_victim", "sources": 8, "records_per_source": 25},
        {"kind": "background_noise", "sources": 500},
    ],
}


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    summary = ibrkit.synth(CONFIG, str(out))
    return summary


def test_gini_pinned_values():
    assert ibrkit.gini([1, 1, 1, 1]) == pytest.approx(0.0, abs=1e-12)
    assert ibrkit.gini([0, 0, 0, 100]) == pytest.approx(0.75, abs=1e-12)


def test_lorenz_endpoints():
    points = ibrkit.lorenz([5, 1, 3])
    assert points[0] == (0.0, 0.0)
    assert points[-1] == (1.0, 1.0)


def test_entropy_pinned_values():
    assert ibrkit.shannon_entropy([7]) == 0.0
    assert ibrkit.shannon_entropy([2, 1, 1]) == pytest.approx(1.5, abs=1e-12)
    assert ibrkit.shannon_entropy([3, 3, 3, 3]) == pytest.approx(2.0, abs=1e-12)


def test_synth_writes_labeled_corpus(corpus):
    assert corpus["records"] > 0
    # the 6 planted scanners are always there; background sources may add more
    assert corpus["scanners"] >= 6
    assert corpus["labeled_asns"] == 2
    truth = json.load(open(corpus["ground_truth"]))
    assert truth["generator"]["seed"] == 1234
    assert len(truth["scanner_sources"]) == corpus["scanners"]


def test_validate_clean_corpus(corpus):
    report = ibrkit.validate_file(corpus["corpus"])
    assert report["rows_read"] == corpus["records"]
    assert report["rows_retained"] == corpus["records"]
    assert report["rejected_total"] == 0
    assert report["conserves"]


def test_analyze_closed_loop(corpus):
    report = ibrkit.analyze_file(
        corpus["corpus"], ground_truth=corpus["ground_truth"], workers=2
    )
    eval_ = report["ground_truth_eval"]
    assert eval_["scanner_precision"] == 1.0
    assert eval_["scanner_recall"] == 1.0
    assert eval_["backscatter_recall"] == 1.0
    assert eval_["asn_class_matched"] == eval_["asn_class_expected"] == 2
    assert report["summary"]["total_packets"] == corpus["packets"]
    truth = json.load(open(corpus["ground_truth"]))
    assert sorted(report["detection"]["scanners"]) == sorted(truth["scanner_sources"])

    # per-port totals reconcile to the dataset total
    ports = report["top_ports"]
    listed = sum(row["packets"] for row in ports["rows"])
    assert listed + ports["other_packets"] == report["summary"]["total_packets"]


def test_analyze_deterministic_across_workers(corpus):
    a = ibrkit.analyze_file_json(corpus["corpus"], workers=1)
    b = ibrkit.analyze_file_json(corpus["corpus"], workers=3, chunk_size=999)
    assert a == b


def test_plot_series_from_report(corpus):
    text = ibrkit.analyze_file_json(corpus["corpus"])
    lorenz = ibrkit.plot_series_csv(text, "lorenz")
    lines = lorenz.strip().splitlines()
    assert lines[0] == "cumulative_sources,cumulative_share"
    assert lines[1] == "0,0"
    assert lines[-1] == "1,1"
    for name in ibrkit.plot_series_names():
        assert ibrkit.plot_series_csv(text, name)


def test_write_report_files(corpus, tmp_path):
    text = ibrkit.analyze_file_json(corpus["corpus"])
    ibrkit.write_report_files(text, "csv", str(tmp_path))
    bundle = sorted(p.name for p in tmp_path.iterdir())
    assert "entropy_series.csv" in bundle
    assert "lorenz.csv" in bundle
    assert len(bundle) == 10


def test_synth_strings_roundtrip():
    small = dict(CONFIG, seed=9, campaigns=[{"kind": "background_noise", "sources": 20}])
    csv_text, truth_text = ibrkit.synth_strings(json.dumps(small))
    assert csv_text.startswith("SourceIP,Port,")
    truth = json.loads(truth_text)
    assert truth["generator"]["algorithm"] == "splitmix64"
    assert truth["records_emitted"] == csv_text.count("\n") - 1


def test_error_kinds_map_to_python_exceptions(tmp_path):
    with pytest.raises(OSError):
        ibrkit.validate_file(str(tmp_path / "missing.csv"))
    with pytest.raises(ValueError, match="seed is required"):
        ibrkit.synth({"window_hours": 2, "campaigns": CONFIG["campaigns"]}, str(tmp_path))
    with pytest.raises(ValueError):
        ibrkit.analyze_file(str(tmp_path / "x.csv"), enrich_policy="sideways")
    bad = tmp_path / "bad.csv"
    bad.write_text("Nope,Columns\n1,2\n")
    with pytest.raises(ValueError, match="missing_critical_column"):
        ibrkit.analyze_file(str(bad))


def test_entropy_bound_random():
    import random

    rng = random.Random(7)
    for _ in range(50):
        counts = [rng.randrange(1, 1000) for _ in range(rng.randrange(1, 64))]
        h = ibrkit.shannon_entropy(counts)
        assert 0.0 <= h <= math.log2(len(counts)) + 1e-12
