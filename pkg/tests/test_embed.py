import numpy as np
import pytest

from contourfp import embed as E
from contourfp.embed import FEATURE_DIM, block_slices, embed, feature_distance, histogram_blocks
from contourfp.errors import DimensionError, EmptyCloudError, InvalidParameterError
from contourfp.pointcloud import farthest_point_sample, normalize_unit_sphere


def random_cloud(rng, n=None):
    n = n or int(rng.integers(5, 800))
    return normalize_unit_sphere(rng.normal(size=(n, 3)) * rng.uniform(0.5, 3, size=3))


def test_layout():
    sizes = [s.stop - s.start for s in block_slices().values()]
    assert sizes == [64, 48, 48, 48, 48] and sum(sizes) == FEATURE_DIM


def test_length_and_unit_norm():
    rng = np.random.default_rng(0)
    for _ in range(30):
        v = embed(random_cloud(rng))
        assert v.shape == (256,)
        assert abs(np.linalg.norm(v) - 1) <= 1e-9
        assert np.all(np.isfinite(v))


def test_identical_clouds():
    cloud = random_cloud(np.random.default_rng(1))
    assert feature_distance(embed(cloud), embed(cloud.copy())) == 0.0


def test_block_mass():
    rng = np.random.default_rng(2)
    for _ in range(20):
        for block in histogram_blocks(random_cloud(rng)):
            assert abs(block.sum() - 1) <= 1e-9


def test_single_point():
    v = embed(np.zeros((1, 3)))
    assert abs(np.linalg.norm(v) - 1) <= 1e-12


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    for _ in range(10):
        cloud = random_cloud(rng)
        shuffled = cloud[rng.permutation(len(cloud))]
        assert np.max(np.abs(embed(cloud) - embed(shuffled))) <= 1e-12


def test_reflection_confined_to_x_block():
    rng = np.random.default_rng(4)
    sl = block_slices()
    for _ in range(10):
        cloud = random_cloud(rng)
        mirrored = cloud * np.array([-1.0, 1.0, 1.0])
        a, b = histogram_blocks(cloud), histogram_blocks(mirrored)
        for i, name in enumerate(sl):
            if name != "x":
                assert np.array_equal(a[i], b[i]), name


def test_similarity_invariance_via_normalize():
    rng = np.random.default_rng(5)
    for _ in range(20):
        cloud = rng.random((300, 3)) * 40
        a, t = rng.uniform(0.05, 20), rng.normal(size=3) * 100
        v1 = embed(normalize_unit_sphere(farthest_point_sample(cloud, 128, seed=1)))
        v2 = embed(normalize_unit_sphere(farthest_point_sample(a * cloud + t, 128, seed=1)))
        assert feature_distance(v1, v2) <= 1e-6


def test_rejects_unnormalised_and_empty():
    with pytest.raises(InvalidParameterError):
        embed(np.array([[0, 0, 0], [3.0, 0, 0]]))
    with pytest.raises(EmptyCloudError):
        embed(np.zeros((0, 3)))
    with pytest.raises(DimensionError):
        embed(np.zeros((4, 2)))


def test_edge_values_land_in_upper_bin():
    counts = E._bin_counts(np.array([0.0, -1e-17, 1.0, 1.0 + 1e-15, -1.0]), -1.0, 1.0, 48)
    assert counts[24] == 2 and counts[47] == 2 and counts[0] == 1


def test_large_cloud_uses_sampled_pairs(monkeypatch):
    monkeypatch.setattr(E, "MAX_EXACT_PAIRS_POINTS", 50)
    monkeypatch.setattr(E, "PAIR_SAMPLE_SIZE", 20000)
    cloud = random_cloud(np.random.default_rng(6), 200)
    pairs = E._pair_counts(cloud)
    assert pairs.sum() == 20000
    assert np.array_equal(pairs, E._pair_counts(cloud))


class TestDistance:
    def test_self(self):
        v = embed(random_cloud(np.random.default_rng(7)))
        assert feature_distance(v, v) == 0.0

    def test_basis(self):
        e1, e2 = np.zeros(256), np.zeros(256)
        e1[0] = e2[1] = 1
        assert feature_distance(e1, e2) == pytest.approx(np.sqrt(2), abs=1e-15)

    def test_reordered_summation(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            a, b = rng.normal(size=256), rng.normal(size=256)
            sq = 0.0
            for x, y in reversed(list(zip(a, b))):
                sq += (x - y) ** 2
            assert abs(feature_distance(a, b) - np.sqrt(sq)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            feature_distance(np.zeros(256), np.zeros(255))
