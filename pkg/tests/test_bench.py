import json
from pathlib import Path

import pytest

from ecstore.bench import (
    CSV_FIELDS,
    BenchScenario,
    format_csv,
    load_scenarios,
    reference_scenarios,
    read_csv,
    run_all,
    run_bench,
    scratch_endpoints,
    timing_scenarios,
    uniform_endpoints,
)
from ecstore.errors import ConfigError

SCENARIOS = Path(__file__).parent.parent / "scenarios" / "reference.json"


def small(**kw):
    base = dict(name="s", size_bytes=768_000, k=10, m=15, threads=(1, 5, 15), baselines=True, rng_seed=3)
    return BenchScenario(**{**base, **kw})


def test_csv_header_and_rows():
    rows = run_bench(small())
    text = format_csv(rows)
    assert text.splitlines()[0] == ",".join(CSV_FIELDS)
    # put: 1+1, k+k, three sweeps; get: 1+1, three sweeps
    assert len(rows) == 5 + 4
    assert read_csv(text)[0]["direction"] == "put"
    assert all(r["total_s"] > 0 for r in rows)


def test_rows_are_deterministic():
    def once():
        return format_csv(run_bench(small(endpoints=uniform_endpoints(15, failure_probability=0.2))))

    a, b = once(), once()
    assert a == b


def test_get_fetches_k():
    rows = run_bench(small(directions=("get",), threads=(1, 15), baselines=False))
    assert [r["chunks_fetched"] for r in rows] == [10, 10]
    assert rows[1]["total_s"] < rows[0]["total_s"]


def test_repetitions_use_distinct_seeds():
    rows = run_bench(small(directions=("get",), threads=(3,), baselines=False, repetitions=3,
                           endpoints=uniform_endpoints(15, failure_probability=0.3)))
    assert [r["rep"] for r in rows] == [0, 1, 2]
    assert len({r["total_s"] for r in rows}) > 1


def test_scenario_validation():
    with pytest.raises(ConfigError):
        small(threads=(0,))
    with pytest.raises(ConfigError):
        small(directions=("sideways",))
    with pytest.raises(ConfigError):
        small(repetitions=0)
    with pytest.raises(ConfigError):
        BenchScenario.from_dict({"name": "x", "size_bytes": 1, "k": 1, "m": 1, "colour": "red"})


def test_scenario_file_matches_builtin():
    assert load_scenarios(SCENARIOS) == reference_scenarios()


def test_scenario_file_endpoint_list(tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"scenarios": [{
        "name": "listed", "size_bytes": 1000, "k": 2, "m": 3, "threads": [1, 2],
        "endpoints": [{"id": f"x{i}", "setup_latency": 1.0, "bandwidth": "inf"} for i in range(3)],
    }]}))
    (scenario,) = load_scenarios(f)
    rows = run_bench(scenario)
    assert [r["total_s"] for r in rows if r["direction"] == "get"] == pytest.approx([2.0, 1.0])
    with pytest.raises(ConfigError):
        load_scenarios(tmp_path / "missing.json")


def test_timing_scenarios_are_serial_puts():
    for s in timing_scenarios():
        assert s.threads == (1,) and s.directions == ("put",) and s.k == s.m


def test_run_all_writes_csv_and_figures(tmp_path):
    scenarios = [small(name="a"), small(name="b", threads=(1,))]
    results = run_all(scenarios, out_dir=tmp_path)
    assert (tmp_path / "bench.csv").read_text().count("\n") == 1 + sum(len(r) for r in results.values())
    assert (tmp_path / "a.csv").exists() and (tmp_path / "b.csv").exists()
    png = tmp_path / "a.png"
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert not (tmp_path / "b.png").exists()


def test_acceptance_mode_rejects_real_endpoints(tmp_path):
    scenario = small(endpoints=scratch_endpoints(15, tmp_path), size_bytes=10_000, threads=(4,))
    with pytest.raises(ConfigError):
        run_bench(scenario)


def test_wallclock_mode(tmp_path):
    scenario = small(endpoints=scratch_endpoints(15, tmp_path), size_bytes=10_000, threads=(4,))
    rows = run_bench(scenario, acceptance=False)
    assert len(rows) == 3 + 2
    assert all(r["total_s"] > 0 for r in rows)
    assert all(not list(p.iterdir()) for p in tmp_path.iterdir())
