import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contourfp.errors import EmptyCloudError, InvalidParameterError
from contourfp.pointcloud import (
    SampleConfig,
    default_time_scale,
    farthest_point_indices,
    farthest_point_sample,
    load_xyz,
    masks_to_pointcloud,
    normalize_unit_sphere,
    save_xyz,
)
from contourfp.video import TrackMaskSequence


def seq_of(masks, frames=None, frame_count=None):
    frames = frames if frames is not None else list(range(len(masks)))
    h, w = masks[0].shape
    return TrackMaskSequence("v", list(zip(frames, masks)), frame_count or max(frames) + 1, h, w)


def brute_min_dists(cloud, chosen):
    d = np.linalg.norm(cloud[:, None, :] - cloud[None, chosen, :], axis=2)
    return d.min(axis=1)


class TestMasksToCloud:
    def test_single_pixel(self):
        m = np.zeros((6, 8), bool)
        m[3, 5] = True
        cloud = masks_to_pointcloud(seq_of([m], frames=[2]), time_scale=1.0)
        assert cloud.tolist() == [[5.0, 3.0, 2.0]]

    def test_additive_over_frames(self):
        m = np.zeros((8, 8), bool)
        m[2:6, 2:6] = True
        assert len(masks_to_pointcloud(seq_of([m, m]), 1.0)) == 24

    def test_ten_frame_square(self):
        m = np.zeros((8, 8), bool)
        m[1:5, 2:6] = True
        cloud = masks_to_pointcloud(seq_of([m] * 10), 1.0)
        assert len(cloud) == 120
        assert sorted(set(cloud[:, 2])) == list(range(10))

    def test_time_scale_default(self):
        m = np.zeros((10, 30), bool)
        m[1, 1] = True
        seq = seq_of([m], frames=[4], frame_count=20)
        assert default_time_scale(30, 10, 20) == 1.0
        assert masks_to_pointcloud(seq)[0, 2] == 4.0

    def test_empty_frames_skipped(self):
        m = np.zeros((5, 5), bool)
        full = m.copy()
        full[2, 2] = True
        assert len(masks_to_pointcloud(seq_of([m, full]), 1.0)) == 1

    def test_all_empty_errors(self):
        m = np.zeros((5, 5), bool)
        with pytest.raises(EmptyCloudError):
            masks_to_pointcloud(seq_of([m, m]), 1.0)

    def test_sample_config_validation(self):
        with pytest.raises(InvalidParameterError):
            SampleConfig(point_count=0)
        with pytest.raises(InvalidParameterError):
            SampleConfig(time_scale=0)


class TestFPS:
    def test_k_at_least_size_returns_all(self):
        cloud = np.random.default_rng(0).random((20, 3))
        assert np.array_equal(farthest_point_sample(cloud, 20, seed=3), cloud)
        assert np.array_equal(farthest_point_sample(cloud, 50, seed=3), cloud)

    def test_k1_is_seeded_start(self):
        cloud = np.random.default_rng(0).random((40, 3))
        expected = int(np.random.default_rng(9).integers(40))
        assert farthest_point_indices(cloud, 1, seed=9).tolist() == [expected]

    def test_collinear_trace(self):
        cloud = np.column_stack([np.arange(10.0), np.zeros(10), np.zeros(10)])
        assert farthest_point_indices(cloud, 3, start=0).tolist() == [0, 9, 4]

    def test_invalid_k(self):
        with pytest.raises(InvalidParameterError):
            farthest_point_indices(np.zeros((3, 3)), 0)

    def test_empty(self):
        with pytest.raises(EmptyCloudError):
            farthest_point_indices(np.zeros((0, 3)), 2)

    def test_duplicates_never_repeat_indices(self):
        cloud = np.zeros((10, 3))
        cloud[5] = 1.0
        idx = farthest_point_indices(cloud, 6, start=0)
        assert len(set(idx.tolist())) == 6
        assert idx.tolist() == [0, 5, 1, 2, 3, 4]

    def test_greedy_certificate(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(2, 513))
            cloud = rng.random((n, 3)) * rng.uniform(0.1, 50)
            k = int(rng.integers(1, n + 1))
            idx = farthest_point_indices(cloud, k, seed=int(rng.integers(1 << 31)))
            assert len(idx) == min(k, n) and len(set(idx.tolist())) == len(idx)
            if k >= n:
                continue
            for i in range(1, len(idx)):
                md = brute_min_dists(cloud, idx[:i])
                md[idx[:i]] = -1
                assert md[idx[i]] >= md.max() * (1 - 1e-9)

    def test_deterministic(self):
        cloud = np.random.default_rng(1).random((300, 3))
        a = farthest_point_indices(cloud, 50, seed=42)
        assert np.array_equal(a, farthest_point_indices(cloud, 50, seed=42))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(-1e3, 1e3))
    def test_similarity_invariant(self, seed, scale, shift):
        cloud = np.random.default_rng(seed).random((200, 3))
        a = farthest_point_indices(cloud, 40, seed=seed)
        b = farthest_point_indices(cloud * scale + shift, 40, seed=seed)
        assert np.array_equal(a, b)

    def test_grid_cloud_similarity_invariant(self):
        # integer lattice clouds are full of exact ties
        m = np.zeros((30, 30), bool)
        m[5:25, 8:20] = True
        cloud = masks_to_pointcloud(seq_of([m] * 12), 0.7)
        a = farthest_point_indices(cloud, 100, seed=1)
        b = farthest_point_indices(cloud * 3.7 + np.array([-12.3, 5.1, 0.37]), 100, seed=1)
        assert np.array_equal(a, b)


class TestNormalize:
    def test_two_points(self):
        out = normalize_unit_sphere([[0, 0, 0], [2, 0, 0]])
        assert out.tolist() == [[-1, 0, 0], [1, 0, 0]]

    def test_already_normal(self):
        pts = np.array([[1.0, 0, 0], [-1.0, 0, 0], [0, 0.5, 0], [0, -0.5, 0]])
        assert np.max(np.abs(normalize_unit_sphere(pts) - pts)) <= 1e-12

    def test_coincident(self):
        assert not normalize_unit_sphere(np.ones((5, 3))).any()

    def test_empty(self):
        with pytest.raises(EmptyCloudError):
            normalize_unit_sphere(np.zeros((0, 3)))

    def test_properties_and_idempotence(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            pts = rng.normal(size=(int(rng.integers(2, 300)), 3)) * rng.uniform(0.1, 100) + rng.normal(size=3) * 50
            out = normalize_unit_sphere(pts)
            assert np.all(np.abs(out.mean(axis=0)) <= 1e-9)
            assert abs(np.linalg.norm(out, axis=1).max() - 1) <= 1e-12
            assert np.max(np.abs(normalize_unit_sphere(out) - out)) <= 1e-12

    def test_similarity_invariance(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            pts = rng.random((100, 3))
            a, t = rng.uniform(0.01, 100), rng.normal(size=3) * 100
            assert np.max(np.abs(normalize_unit_sphere(a * pts + t) - normalize_unit_sphere(pts))) <= 1e-9


def test_xyz_round_trip(tmp_path):
    cloud = np.random.default_rng(0).random((30, 3)) * 1e3
    save_xyz(tmp_path / "c.xyz", cloud)
    assert np.array_equal(load_xyz(tmp_path / "c.xyz"), cloud)
