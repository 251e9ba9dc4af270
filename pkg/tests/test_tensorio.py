"""Tensor format round-trips, malformed payload rejection, dataset loading."""

from __future__ import annotations

import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from scenesearch.dataset import load_dataset
from scenesearch.errors import DatasetValidationError, TensorFormatError
from scenesearch.fixture import generate_fixture
from scenesearch.tensorio import (
    read_tensor,
    tensor_from_base64,
    tensor_to_base64,
    write_tensor,
    write_tensor_file,
)


def expected_size(shape) -> int:
    n = 1
    for d in shape:
        n *= d
    return 8 + 4 + 8 * len(shape) + 4 * n


class TestTensorFormat:
    def test_scalar_like_is_24_bytes(self):
        data = write_tensor(np.array([0.0], dtype=np.float32))
        assert len(data) == 24 == expected_size((1,))

    def test_round_trip_2x2(self):
        t = np.array([[0, 1], [2, 3]], dtype=np.float32)
        out = read_tensor(write_tensor(t))
        assert out.dtype == np.float32
        assert out.shape == t.shape
        assert np.array_equal(out, t)

    def test_size_formula_rank3(self):
        rng = np.random.default_rng(0)
        t = rng.normal(size=(3, 4, 5)).astype(np.float32)
        assert len(write_tensor(t)) == 8 + 4 + 24 + 240 == expected_size((3, 4, 5))

    def test_golden_bytes_little_endian(self):
        # Independently packed layout: magic, rank u32, dims u64, data f32.
        t = np.array([[1.5, -2.0, 3.25]], dtype=np.float32)
        golden = b"SCNTNSR1" + struct.pack("<I", 2) + struct.pack("<QQ", 1, 3)
        golden += struct.pack("<fff", 1.5, -2.0, 3.25)
        assert write_tensor(t) == golden
        assert np.array_equal(read_tensor(golden), t)

    def test_deterministic_bytes(self):
        t = np.arange(12, dtype=np.float32).reshape(3, 4)
        assert write_tensor(t) == write_tensor(t.copy())

    @settings(max_examples=150, deadline=None)
    @given(
        hnp.arrays(
            dtype=np.float32,
            shape=hnp.array_shapes(min_dims=1, max_dims=4, min_side=1, max_side=6),
            elements=st.floats(width=32, allow_nan=False, allow_infinity=False),
        )
    )
    def test_round_trip_property(self, t):
        out = read_tensor(write_tensor(t))
        assert out.shape == t.shape
        assert np.array_equal(out, t)
        assert len(write_tensor(t)) == expected_size(t.shape)

    def test_base64_round_trip(self):
        t = np.linspace(-1, 1, 7, dtype=np.float32)
        assert np.array_equal(tensor_from_base64(tensor_to_base64(t)), t)


class TestTensorErrors:
    def test_bad_magic(self):
        data = b"XXXXXXXX" + write_tensor(np.array([1.0], dtype=np.float32))[8:]
        with pytest.raises(TensorFormatError) as err:
            read_tensor(data)
        assert err.value.code == "bad-magic"
        assert err.value.offset == 0

    def test_truncated_by_one_byte(self):
        data = write_tensor(np.array([1.0, 2.0], dtype=np.float32))
        with pytest.raises(TensorFormatError) as err:
            read_tensor(data[:-1])
        assert err.value.code == "truncated"
        assert err.value.offset == len(data) - 1

    def test_truncated_header(self):
        with pytest.raises(TensorFormatError) as err:
            read_tensor(b"SCNTNSR1\x01")
        assert err.value.code == "truncated"

    def test_trailing_bytes(self):
        data = write_tensor(np.array([1.0], dtype=np.float32)) + b"\x00"
        with pytest.raises(TensorFormatError) as err:
            read_tensor(data)
        assert err.value.code == "trailing-bytes"

    def test_rank_out_of_range(self):
        data = b"SCNTNSR1" + struct.pack("<I", 9) + struct.pack("<Q", 1) * 9 + struct.pack("<f", 0)
        with pytest.raises(TensorFormatError) as err:
            read_tensor(data)
        assert err.value.code == "bad-rank"
        assert err.value.offset == 8

    def test_zero_dim(self):
        data = b"SCNTNSR1" + struct.pack("<I", 1) + struct.pack("<Q", 0)
        with pytest.raises(TensorFormatError) as err:
            read_tensor(data)
        assert err.value.code == "bad-dims"

    def test_nan_refused_on_write(self):
        with pytest.raises(TensorFormatError) as err:
            write_tensor(np.array([1.0, np.nan], dtype=np.float32))
        assert err.value.code == "non-finite"

    def test_nan_refused_on_read_with_offset(self):
        data = b"SCNTNSR1" + struct.pack("<I", 1) + struct.pack("<Q", 3)
        data += struct.pack("<fff", 1.0, float("inf"), 2.0)
        with pytest.raises(TensorFormatError) as err:
            read_tensor(data)
        assert err.value.code == "non-finite"
        assert err.value.offset == 8 + 4 + 8 + 4  # second value

    def test_missing_file(self, tmp_path):
        from scenesearch.tensorio import read_tensor_file

        with pytest.raises(TensorFormatError) as err:
            read_tensor_file(tmp_path / "nope.tnsr")
        assert err.value.code == "missing-file"


class TestDatasetLoading:
    def test_fixture_loads_and_orders(self, small_fixture):
        ds1 = load_dataset(small_fixture)
        ds2 = load_dataset(small_fixture)
        ids1 = [s.shot_id for s in ds1.all_shots()]
        ids2 = [s.shot_id for s in ds2.all_shots()]
        assert ids1 == ids2 == sorted(ids1)
        assert [v.video_id for v in ds1.videos] == sorted(v.video_id for v in ds1.videos)
        assert [sc.scene_id for sc in ds1.all_scenes()] == sorted(
            sc.scene_id for sc in ds1.all_scenes()
        )

    def test_cross_links(self, small_dataset):
        ds = small_dataset
        for scene in ds.all_scenes():
            for sid in scene.shot_ids():
                assert ds.scene_id_of_shot[sid] == scene.scene_id
                assert ds.shot_by_id[sid].video_id == scene.video_id
        for shot in ds.all_shots():
            assert shot.shot_id in ds.fc6
            assert len(ds.blocks[shot.shot_id]) == 5

    def test_documentary_scale_stats_line(self, tmp_path):
        # One video shaped like a real 50-minute episode: 450 shots, 66 scenes.
        manifest = generate_fixture(
            tmp_path,
            n_videos=1,
            shots_per_video=450,
            scenes_per_video=66,
            vocab_size=40,
            n_categories=15,
            exemplars_per_category=4,
            seed=5,
        )
        ds = load_dataset(manifest)
        line = ds.format_stats()[0]
        assert "450, 66" in line
        assert ds.stats()[0]["shots"] == 450
        assert ds.stats()[0]["scenes"] == 66

    def test_missing_tensor_file(self, tmp_path):
        manifest = generate_fixture(tmp_path, n_videos=1, shots_per_video=6,
                                    scenes_per_video=2, vocab_size=8, n_categories=4,
                                    exemplars_per_category=3, seed=1)
        victim = next((tmp_path / "video00" / "keyframes").glob("*.fc6.tnsr"))
        victim.unlink()
        with pytest.raises(DatasetValidationError) as err:
            load_dataset(manifest)
        assert any("missing-file" in v for v in err.value.violations)

    def test_all_violations_reported(self, tmp_path):
        manifest = generate_fixture(tmp_path, n_videos=1, shots_per_video=6,
                                    scenes_per_video=2, vocab_size=8, n_categories=4,
                                    exemplars_per_category=3, seed=1)
        victims = sorted((tmp_path / "video00" / "keyframes").glob("*.fc6.tnsr"))[:2]
        for v in victims:
            v.unlink()
        with pytest.raises(DatasetValidationError) as err:
            load_dataset(manifest)
        assert sum("missing-file" in v for v in err.value.violations) == 2

    def test_overlapping_scene_span(self, tmp_path):
        manifest = generate_fixture(tmp_path, n_videos=1, shots_per_video=6,
                                    scenes_per_video=2, vocab_size=8, n_categories=4,
                                    exemplars_per_category=3, seed=1)
        scenes_file = tmp_path / "video00" / "scenes.jsonl"
        rows = [json.loads(line) for line in scenes_file.read_text().splitlines()]
        rows[1]["shot_span"][0] -= 1  # now overlaps scene 0's last shot
        scenes_file.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(DatasetValidationError) as err:
            load_dataset(manifest)
        assert any("bad-partition" in v for v in err.value.violations)

    def test_gap_in_partition(self, tmp_path):
        manifest = generate_fixture(tmp_path, n_videos=1, shots_per_video=6,
                                    scenes_per_video=2, vocab_size=8, n_categories=4,
                                    exemplars_per_category=3, seed=1)
        scenes_file = tmp_path / "video00" / "scenes.jsonl"
        rows = [json.loads(line) for line in scenes_file.read_text().splitlines()]
        rows[0]["shot_span"][1] -= 1  # shot left out of every scene
        scenes_file.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(DatasetValidationError) as err:
            load_dataset(manifest)
        assert any("bad-partition" in v for v in err.value.violations)

    def test_bad_token_rejected(self, tmp_path):
        manifest = generate_fixture(tmp_path, n_videos=1, shots_per_video=6,
                                    scenes_per_video=2, vocab_size=8, n_categories=4,
                                    exemplars_per_category=3, seed=1)
        tfile = tmp_path / "video00" / "transcript.jsonl"
        rows = [json.loads(line) for line in tfile.read_text().splitlines()]
        rows.append({"video_id": "video00", "t": 2.0, "surface": "X", "lemma": "UPPER", "pos": "NN"})
        rows.append({"video_id": "video00", "t": 2.0, "surface": "x", "lemma": "x", "pos": "VB"})
        rows.append({"video_id": "video00", "t": 1e9, "surface": "x", "lemma": "x", "pos": "NN"})
        tfile.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(DatasetValidationError) as err:
            load_dataset(manifest)
        assert sum("bad-token" in v for v in err.value.violations) == 3

    def test_overlapping_shots(self, tmp_path):
        manifest = generate_fixture(tmp_path, n_videos=1, shots_per_video=6,
                                    scenes_per_video=2, vocab_size=8, n_categories=4,
                                    exemplars_per_category=3, seed=1)
        sfile = tmp_path / "video00" / "shots.jsonl"
        rows = [json.loads(line) for line in sfile.read_text().splitlines()]
        rows[1]["t_start"] = rows[0]["t_end"] - 0.5
        sfile.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(DatasetValidationError) as err:
            load_dataset(manifest)
        assert any("overlap" in v for v in err.value.violations)

    def test_unknown_fields_ignored(self, tmp_path):
        manifest = generate_fixture(tmp_path, n_videos=1, shots_per_video=6,
                                    scenes_per_video=2, vocab_size=8, n_categories=4,
                                    exemplars_per_category=3, seed=1)
        sfile = tmp_path / "video00" / "shots.jsonl"
        rows = [json.loads(line) for line in sfile.read_text().splitlines()]
        for r in rows:
            r["extra_field"] = "whatever"
        sfile.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        load_dataset(manifest)  # must not raise

    def test_fc6_written_as_wrong_shape(self, tmp_path):
        manifest = generate_fixture(tmp_path, n_videos=1, shots_per_video=6,
                                    scenes_per_video=2, vocab_size=8, n_categories=4,
                                    exemplars_per_category=3, seed=1)
        victim = sorted((tmp_path / "video00" / "keyframes").glob("*.fc6.tnsr"))[0]
        write_tensor_file(victim, np.zeros(128, dtype=np.float32))
        with pytest.raises(DatasetValidationError) as err:
            load_dataset(manifest)
        assert any("bad-features" in v for v in err.value.violations)
