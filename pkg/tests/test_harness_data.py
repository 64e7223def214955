"""Tests for the pattern sources and query corruptions."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fyhopfield as fh
from fyhopfield.harness import (
    ExperimentConfig,
    corrupt,
    load_dataset,
    load_flat_matrix,
    load_idx_images,
    load_queries,
    read_idx_images,
    synth_patterns,
    write_flat_matrix,
)


def write_idx(path, pixels, magic=0x803, count=None):
    images = np.asarray(pixels, dtype=np.uint8)
    n, rows, cols = images.shape
    header = struct.pack(">IIII", magic, n if count is None else count, rows, cols)
    path.write_bytes(header + images.tobytes())
    return path


class TestIdx:
    def test_pixels_map_to_unit_interval(self, tmp_path):
        pixels = np.zeros((4, 2, 2), dtype=np.uint8)
        pixels[1, 0, 1] = 255
        mem = load_idx_images(write_idx(tmp_path / "img.idx", pixels))
        assert mem.X.shape == (4, 4)
        assert mem.X[0].tolist() == [-1.0, -1.0, -1.0, -1.0]
        assert mem.X[1, 1] == 1.0

    def test_raw_shape(self, tmp_path):
        images = read_idx_images(write_idx(tmp_path / "img.idx", np.ones((3, 2, 5))))
        assert images.shape == (3, 2, 5)
        assert images.dtype == np.uint8

    def test_bad_magic(self, tmp_path):
        path = write_idx(tmp_path / "img.idx", np.zeros((1, 2, 2)), magic=0x801)
        with pytest.raises(fh.FormatError, match="magic") as info:
            read_idx_images(path)
        assert info.value.offset == 0

    def test_truncated_payload(self, tmp_path):
        path = write_idx(tmp_path / "img.idx", np.zeros((2, 2, 2)), count=3)
        with pytest.raises(fh.FormatError, match="byte offset 24"):
            read_idx_images(path)

    def test_short_header(self, tmp_path):
        path = tmp_path / "img.idx"
        path.write_bytes(b"\x00\x00\x08")
        with pytest.raises(fh.FormatError, match="header"):
            read_idx_images(path)

    def test_zero_dimension(self, tmp_path):
        path = tmp_path / "img.idx"
        path.write_bytes(struct.pack(">IIII", 0x803, 1, 0, 2))
        with pytest.raises(fh.FormatError, match="zero") as info:
            read_idx_images(path)
        assert info.value.offset == 8

    @settings(max_examples=300, deadline=None)
    @given(
        st.lists(
            st.tuples(st.integers(0, 15), st.integers(0, 255)), min_size=1, max_size=4
        ),
        st.integers(0, 16 + 12),
    )
    def test_mutated_header_is_rejected_or_consistent(self, tmp_path_factory, edits, keep):
        raw = bytearray(struct.pack(">IIII", 0x803, 2, 2, 3) + bytes(range(12)))
        for offset, value in edits:
            raw[offset] = value
        path = tmp_path_factory.mktemp("idx") / "img.idx"
        path.write_bytes(bytes(raw[:keep]))
        try:
            images = read_idx_images(path)
        except fh.FormatError as e:
            assert 0 <= e.offset <= keep
            return
        magic, count, rows, cols = struct.unpack(">IIII", bytes(raw[:16]))
        assert magic == 0x803
        assert images.shape == (count, rows, cols)
        assert images.size == keep - 16


class TestFlatMatrix:
    def test_written_matrix_loads_back(self, tmp_path):
        X = np.arange(6, dtype=float).reshape(2, 3)
        write_flat_matrix(tmp_path / "m.bin", X)
        np.testing.assert_array_equal(load_flat_matrix(tmp_path / "m.bin").X, X)

    def test_length_mismatch(self, tmp_path):
        path = tmp_path / "m.bin"
        path.write_bytes(struct.pack("<QQ", 2, 2) + np.zeros(3).tobytes())
        with pytest.raises(fh.FormatError, match="promises 32 bytes"):
            load_flat_matrix(path)

    def test_writer_needs_matrix(self, tmp_path):
        with pytest.raises(fh.DomainError):
            write_flat_matrix(tmp_path / "m.bin", np.zeros(3))


class TestSynthPatterns:
    def test_sphere_norms(self):
        mem = synth_patterns("sphere", 10, 5, radius=3.0, seed=1)
        np.testing.assert_allclose(mem.norms, 3.0)

    def test_orthogonal_gram(self):
        mem = synth_patterns("orthogonal", 4, 6, radius=2.0, seed=1)
        np.testing.assert_allclose(mem.X @ mem.X.T, 4.0 * np.eye(4), atol=1e-12)

    def test_orthogonal_needs_room(self):
        with pytest.raises(fh.DomainError, match="orthogonal"):
            synth_patterns("orthogonal", 5, 4)

    def test_binary_entries(self):
        mem = synth_patterns("binary", 6, 8, seed=2)
        assert set(np.unique(mem.X)) == {-1.0, 1.0}

    def test_seeded(self):
        a = synth_patterns("gaussian", 3, 4, seed=9)
        b = synth_patterns("gaussian", 3, 4, seed=9)
        np.testing.assert_array_equal(a.X, b.X)

    def test_min_separation_holds(self):
        mem = synth_patterns("sphere", 12, 32, min_separation=0.3, seed=0)
        assert fh.pattern_separation(mem).min() >= 0.3

    def test_impossible_separation(self):
        with pytest.raises(fh.CapacityError, match="Could not place"):
            synth_patterns("sphere", 5, 2, min_separation=1.9, seed=0, max_tries=20)

    def test_unknown_kind(self):
        with pytest.raises(fh.DomainError, match="Unknown synthetic kind"):
            synth_patterns("cubes", 2, 2)


class TestCorrupt:
    def test_zero_noise_is_a_copy(self):
        x = np.array([0.5, -0.5])
        out = corrupt(x, "gaussian", 0.0)
        np.testing.assert_array_equal(out, x)
        assert out is not x

    def test_gaussian_is_clipped(self):
        out = corrupt(np.zeros(1000), "gaussian", 5.0, rng=0)
        assert out.min() >= -1.0 and out.max() <= 1.0

    def test_mask_zeros_a_suffix(self):
        out = corrupt(np.ones(8), "mask", 0.25)
        np.testing.assert_array_equal(out, [1, 1, 1, 1, 1, 1, 0, 0])

    def test_mask_bounds(self):
        with pytest.raises(fh.DomainError, match="mask fraction"):
            corrupt(np.ones(4), "mask", 1.5)

    def test_unknown_mode(self):
        with pytest.raises(fh.DomainError, match="Unknown corruption"):
            corrupt(np.ones(4), "blur", 0.1)


class TestLoadDataset:
    def test_synthetic(self):
        cfg = ExperimentConfig(dataset="synthetic-orthogonal", dim=8)
        mem = load_dataset(cfg, 4, seed=0)
        assert mem.X.shape == (4, 8)

    def test_file_is_subsampled(self, tmp_path):
        write_flat_matrix(tmp_path / "m.bin", np.arange(20, dtype=float).reshape(10, 2))
        cfg = ExperimentConfig(dataset="flat", dataset_path=str(tmp_path / "m.bin"))
        mem = load_dataset(cfg, 3, seed=1)
        assert mem.n_patterns == 3
        assert load_dataset(cfg, 50, seed=1).n_patterns == 10

    def test_missing_file_falls_back(self, tmp_path, caplog):
        cfg = ExperimentConfig(dataset="idx", dataset_path=str(tmp_path / "absent.idx"), dim=6)
        with caplog.at_level("WARNING"):
            mem = load_dataset(cfg, 5, seed=0)
        assert mem.X.shape == (5, 6)
        assert "not found" in caplog.text

    def test_queries_default_to_memory(self):
        assert load_queries(ExperimentConfig(), seed=0) is None
