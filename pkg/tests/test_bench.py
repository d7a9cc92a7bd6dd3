import csv
import io
import json
import math

import numpy as np
import pytest

from lindblad_bench import bench, kernels
from lindblad_bench.bench import (
    CSV_FIELDS,
    BenchConfig,
    BenchError,
    BenchResult,
    benchmark_inputs,
    compare,
    derive_metrics,
    run_bench,
    run_matrix,
)
from lindblad_bench.propagate import Variant, available_variants
from lindblad_bench.roofline import characterize


@pytest.mark.parametrize("dim,ns,gflops,gbs", [
    (3, 62, 10.4, 25.5),
    (9, 3242, 16.2, 33.2),
    (27, 295_028, 14.4, 28.9),
])
def test_derived_metrics_from_known_timings(dim, ns, gflops, gbs):
    g, b = derive_metrics(dim, ns)
    assert abs(round(g, 1) - gflops) <= 0.1
    assert abs(round(b, 1) - gbs) <= 0.1


def test_derived_metrics_degenerate_size():
    assert derive_metrics(1, 2.0) == (4.0, 24.0)


def test_metric_identity_holds_for_results():
    for dim in (1, 3, 9, 27):
        for ns in (1.0, 37.5, 1e6):
            r = BenchResult.from_timing(BenchConfig(dim, "aos"), ns)
            k = characterize(dim)
            assert r.gflops * k.bytes == pytest.approx(r.gbs * k.flops, rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        BenchConfig(0, "aos")
    with pytest.raises(ValueError):
        BenchConfig(3, "aos", reps=0)
    with pytest.raises(ValueError):
        BenchConfig(3, "aos", warmup=-1)
    with pytest.raises(ValueError):
        BenchConfig(3, "avx512")


def test_benchmark_inputs_are_safe_for_long_runs():
    p, v = benchmark_inputs(9, seed=3)
    assert np.allclose(p.conj().T @ p, np.eye(81), atol=1e-12)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    p2, v2 = benchmark_inputs(9, seed=3)
    assert np.array_equal(p, p2) and np.array_equal(v, v2)


@pytest.mark.parametrize("variant", available_variants())
def test_run_bench_cell(variant):
    r = run_bench(BenchConfig(3, variant, reps=2000, warmup=5, seed=1))
    assert r.ok and r.ns_per_step > 0
    assert r.profile == kernels.PROFILE.name
    assert math.isfinite(abs(r.checksum))
    assert set(r.row()) == set(CSV_FIELDS)


@pytest.mark.parametrize("variant", available_variants())
def test_checksum_independent_of_reps_split(variant):
    # same total step count, split differently between warmup and timed reps
    a = run_bench(BenchConfig(9, variant, reps=500, warmup=10, seed=7))
    b = run_bench(BenchConfig(9, variant, reps=10, warmup=500, seed=7))
    assert a.checksum == b.checksum


def test_checksum_identical_across_variants_in_strict_mode():
    if kernels.FASTMATH:
        pytest.skip("relaxed floating point may reorder sums")
    a = run_bench(BenchConfig(3, "aos", reps=300, seed=2))
    b = run_bench(BenchConfig(3, "soa", reps=300, seed=2))
    assert a.checksum == b.checksum


def test_too_short_block_is_refused(monkeypatch):
    ticks = iter([0, 1])
    monkeypatch.setattr(bench.time, "perf_counter_ns", lambda: next(ticks))
    with pytest.raises(BenchError):
        run_bench(BenchConfig(1, "aos", reps=1, warmup=0))


def test_run_matrix_shape_and_order():
    rs = run_matrix([3, 1], ["soa", "aos"], reps=200, warmup=1)
    assert [(r.config.dim, r.config.variant.value) for r in rs] == [
        (3, "soa"), (3, "aos"), (1, "soa"), (1, "aos")]
    assert run_matrix([3], []) == []


def test_run_matrix_marks_failed_cells(monkeypatch):
    monkeypatch.setattr(kernels, "simd_supported", lambda: False)
    rs = run_matrix([1, 3], ["aos", "simd"], reps=100, warmup=0)
    assert [r.ok for r in rs] == [True, False, True, False]
    failed = rs[1]
    assert math.isnan(failed.gbs) and "simd" in failed.error


def test_single_cell_matrix_matches_run_bench():
    cfg = BenchConfig(3, "soa", reps=300, warmup=2, seed=4)
    (r,) = run_matrix([3], ["soa"], reps=300, warmup=2, seed=4)
    assert r.config == cfg
    assert r.checksum == run_bench(cfg).checksum


def _fake(dim, variant, ns):
    return BenchResult.from_timing(BenchConfig(dim, variant), ns, profile="x")


def test_compare_ranking_at_d3():
    ranking = compare([_fake(3, "aos", 62), _fake(3, "soa", 35), _fake(3, "simd", 47)])
    ranks = ranking[3]
    assert [r.variant for r in ranks] == [Variant.SOA, Variant.SIMD, Variant.AOS]
    assert round(ranks[0].ratio, 2) == 1.77
    assert ranks[-1].ratio == 1.0


def test_compare_ties_keep_enum_order():
    ranks = compare([_fake(9, "simd", 10), _fake(9, "aos", 10), _fake(9, "soa", 10)])[9]
    assert [r.variant for r in ranks] == [Variant.AOS, Variant.SOA, Variant.SIMD]
    assert all(r.ratio == 1.0 for r in ranks)


def test_compare_dims_independent():
    out = compare([_fake(3, "aos", 10), _fake(9, "aos", 100), _fake(9, "soa", 50),
                   BenchResult.failed(BenchConfig(3, "soa"), "boom")])
    assert set(out) == {3, 9}
    assert len(out[3]) == 1 and out[9][0].ratio == 2.0


def test_csv_and_json_output():
    rs = [_fake(3, "aos", 62), BenchResult.failed(BenchConfig(3, "simd"), "no simd", profile="x")]
    buf = io.StringIO()
    bench.write_csv(rs, buf, "toy")
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# generated=") and "machine=toy" in lines[0]
    rows = list(csv.DictReader(lines[1:]))
    assert tuple(rows[0]) == CSV_FIELDS
    assert float(rows[0]["ns_per_step"]) == 62.0
    assert rows[1]["gbs"] == "nan"
    doc = json.loads(json.dumps(bench.results_json(rs, "toy")))
    assert doc["results"][1]["gbs"] is None
    assert doc["results"][0]["variant"] == "aos"
