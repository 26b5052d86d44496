import itertools
import os

import numpy as np
import pytest

from oracles import median_outcome_position, nash_flags
from peakverify import _kernels_py, kernels

BACKENDS = sorted(kernels.BACKENDS)


def test_compiled_backend_selected_when_built():
    assert kernels.BACKEND in kernels.BACKENDS
    forced = bool(os.environ.get("PEAKVERIFY_PURE_PYTHON"))
    if "compiled" in kernels.BACKENDS and not forced:
        assert kernels.BACKEND == "compiled"
    if forced:
        assert kernels.BACKEND == "python"


@pytest.mark.parametrize("backend", BACKENDS)
def test_median_positions_against_statistics(backend):
    impl = kernels.BACKENDS[backend]
    rng = np.random.default_rng(11)
    for n, m in [(3, 3), (4, 5), (6, 4), (5, 6)]:
        counts = np.bincount(rng.integers(0, m, n - 1), minlength=m).astype(np.int64)
        phantoms = np.repeat(np.arange(m), counts)
        peaks = np.ascontiguousarray(rng.integers(0, m, size=(200, n)), dtype=np.int64)
        got = impl.median_positions(peaks, counts)
        want = [median_outcome_position(row, phantoms) for row in peaks]
        assert list(got) == want


def random_game(rng, n, k, m):
    g = rng.integers(0, m, size=k ** n).astype(np.int8)
    score = rng.integers(0, 5, size=(n, m)).astype(np.int64)
    bonus = rng.integers(0, 2, size=(n, k)).astype(np.int64)
    cands = [np.sort(rng.choice(k, size=int(rng.integers(1, k + 1)), replace=False)).astype(np.int64)
             for _ in range(n)]
    return g, score, bonus, cands


@pytest.mark.parametrize("backend", BACKENDS)
def test_nash_mask_against_loops(backend):
    impl = kernels.BACKENDS[backend]
    rng = np.random.default_rng(5)
    for n, k, m in [(3, 4, 3), (3, 6, 4), (4, 3, 3), (2, 5, 2)]:
        for _ in range(10):
            g, score, bonus, cands = random_game(rng, n, k, m)
            shape = (k,) * n

            def out(prof):
                return int(g[np.ravel_multi_index(prof, shape)])

            def util(i, prof, x):
                return score[i, x] + bonus[i, prof[i]]

            want = nash_flags(out, k, n, [list(c) for c in cands], util)
            assert list(impl.nash_mask(g, k, cands, score, bonus).astype(bool)) == want


def test_backends_agree():
    if len(kernels.BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(9)
    c, p = kernels.BACKENDS["compiled"], kernels.BACKENDS["python"]
    for _ in range(20):
        g, score, bonus, cands = random_game(rng, 3, 7, 3)
        assert np.array_equal(c.nash_mask(g, 7, cands, score, bonus), p.nash_mask(g, 7, cands, score, bonus))
    peaks = np.ascontiguousarray(np.array(list(itertools.product(range(4), repeat=5))), dtype=np.int64)
    counts = np.array([1, 0, 2, 1], dtype=np.int64)
    assert np.array_equal(c.median_positions(peaks, counts), p.median_positions(peaks, counts))


def test_wrapper_handles_empty_inputs():
    assert kernels.median_positions(np.empty((0, 3)), [1, 0, 1]).shape == (0,)
    g = np.zeros(27, dtype=np.int8)
    assert kernels.nash_mask(g, 3, [[0], [], [1]], np.zeros((3, 3)), np.zeros((3, 3))).shape == (0,)


def test_fallback_is_plain_numpy():
    assert _kernels_py.median_positions(np.array([[0, 2, 1]]), np.array([1, 0, 1]))[0] == 1


def test_benchmark_script_runs(capsys, monkeypatch):
    import runpy
    import sys
    from pathlib import Path
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    monkeypatch.setattr(sys, "argv", [str(script), "--repeat", "1"])
    runpy.run_path(str(script), run_name="__main__")
    out = capsys.readouterr().out
    assert "median_positions" in out and "nash_mask" in out
