"""Compiled and numpy backends must agree exactly."""

import numpy as np
import pytest

from contourfp import kernels
from contourfp.embed import EDGE_EPS

BACKENDS = kernels.backends()
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def test_selected_backend_is_available():
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_pair_histogram_against_brute_force(name):
    rng = np.random.default_rng(0)
    pts = rng.random((60, 3)) - 0.5
    counts = BACKENDS[name].pair_distance_histogram(pts, 48, 0.0, 24.0, EDGE_EPS)
    expected = np.zeros(48, dtype=int)
    for i in range(60):
        for j in range(i + 1, 60):
            d = float(np.sqrt(((pts[i] - pts[j]) ** 2).sum()))
            expected[min(47, int(np.floor(d * 24.0 + EDGE_EPS)))] += 1
    assert counts.tolist() == expected.tolist()
    assert counts.sum() == 60 * 59 // 2


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_fps_small(name):
    pts = np.column_stack([np.arange(10.0), np.zeros(10), np.zeros(10)])
    assert BACKENDS[name].fps_indices(pts, 3, 0, 1e-9).tolist() == [0, 9, 4]


@needs_compiled
@pytest.mark.parametrize("seed", range(5))
def test_backends_identical_random(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(int(rng.integers(50, 2000)), 3))
    k = int(rng.integers(1, len(pts)))
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    assert np.array_equal(py.fps_indices(pts, k, 0, 1e-9), cy.fps_indices(pts, k, 0, 1e-9))
    pts /= np.linalg.norm(pts, axis=1).max()
    assert np.array_equal(py.pair_distance_histogram(pts, 48, 0.0, 24.0, EDGE_EPS),
                          cy.pair_distance_histogram(pts, 48, 0.0, 24.0, EDGE_EPS))


@needs_compiled
def test_backends_identical_on_lattice():
    # exact ties everywhere
    g = np.stack(np.meshgrid(np.arange(12.0), np.arange(9.0), np.arange(5.0) * 0.8, indexing="ij"), -1).reshape(-1, 3)
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    assert np.array_equal(py.fps_indices(g, 200, 17, 1e-9), cy.fps_indices(g, 200, 17, 1e-9))
