# Copyright 2026 The tactile-evalkit Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os
import shutil
import subprocess

import numpy as np
import pytest

import tactile_evalkit as ek


def cli():
    path = os.environ.get("EVALKIT_CLI") or shutil.which("evalkit")
    if path is None:
        pytest.skip("evalkit executable not found")
    return path


def write_csv(path, rows, prefix):
    rows = np.asarray(rows, dtype=np.float32)
    with open(path, "w") as f:
        f.write("sample_id," + ",".join(f"x{j}" for j in range(rows.shape[1])) + "\n")
        for i, row in enumerate(rows):
            f.write(f"{prefix}{i}," + ",".join(repr(float(v)) for v in row) + "\n")


def test_two_point_tmmd():
    g = np.array([[0.0], [0.0]])
    r = np.array([[2.0], [2.0]])
    assert ek.tmmd(g, r, sigma=1.0)["value"] == pytest.approx(1.7293294, abs=1e-7)


def test_identical_sets_not_positive():
    x = np.random.default_rng(0).normal(size=(50, 4)).astype(np.float32)
    assert ek.tmmd(x, x.copy())["value"] <= 0.0


def test_single_row_rejected():
    with pytest.raises(ek.EvalkitError):
        ek.tmmd(np.zeros((1, 3)), np.zeros((5, 3)), sigma=1.0)


def test_bad_dtype_and_layout_rejected():
    with pytest.raises(ek.EvalkitError):
        ek.tmmd(np.zeros((4, 2), dtype=np.int32), np.zeros((4, 2)), sigma=1.0)
    with pytest.raises(ek.EvalkitError):
        ek.tmmd(np.zeros((4, 2)).T, np.zeros((2, 4)), sigma=1.0)


def test_identical_rows_itmmd_zero():
    x = np.ones((4, 3), dtype=np.float32)
    assert ek.itmmd(x, sigma=1.0, split_mode="interleave")["value"] == 0.0


def test_two_class_dtmmd_zero():
    x = np.array([[0.0], [0.0], [0.0], [0.0], [9.0], [9.0], [9.0], [9.0]])
    labels = ["a"] * 4 + ["b"] * 4
    assert ek.dtmmd(x, labels, sigma=1.0, split_mode="interleave")["value"] == 0.0


def test_seeded_results_repeat():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(60, 5))
    labels = [f"c{i % 3}" for i in range(60)]
    a = ek.citmmd(x, labels, seed=11, repeats=3)
    b = ek.citmmd(x, labels, seed=11, repeats=3)
    assert a == b


def test_inputs_not_mutated():
    x = np.random.default_rng(1).normal(size=(40, 6))
    before = x.copy()
    ek.itmmd(x, seed=2)
    ek.tmmd(x, x[::-1].copy())
    assert np.array_equal(x, before)


def test_audit_frame_overlap():
    meta = [
        {"sample_id": "a", "video_id": "v1", "frame_index": 169, "split": "train"},
        {"sample_id": "b", "video_id": "v1", "frame_index": 170, "split": "test"},
        {"sample_id": "c", "video_id": "v2", "frame_index": 0, "split": "test"},
    ]
    report = ek.audit(meta)
    overlap = report["video_overlap"]
    assert [o["video_id"] for o in overlap] == ["v1"]
    assert overlap[0]["min_frame_gap"] == 1


def test_audit_disjoint_and_planted_duplicate():
    meta = [
        {"sample_id": "a", "video_id": "v1", "split": "train"},
        {"sample_id": "b", "video_id": "v2", "split": "test"},
        {"sample_id": "c", "video_id": "v3", "split": "test"},
    ]
    emb = np.array([[1.0, 0.0], [1.0, 0.001], [0.0, 1.0]], dtype=np.float32)
    assert ek.audit(meta)["value"] == 0.0
    report = ek.audit(meta, emb, tau=0.99)
    pairs = report["near_duplicates"]
    assert [(p["train_id"], p["test_id"]) for p in pairs] == [("a", "b")]


def test_tmmd_parity_with_cli(tmp_path):
    exe = cli()
    rng = np.random.default_rng(5)
    g = rng.normal(size=(70, 4))
    r = rng.normal(0.4, 1.0, size=(65, 4))
    write_csv(tmp_path / "g.csv", g, "g")
    write_csv(tmp_path / "r.csv", r, "r")
    out = subprocess.run(
        [exe, "metrics", "tmmd", "--generated", str(tmp_path / "g.csv"),
         "--reference", str(tmp_path / "r.csv")],
        check=True, capture_output=True, text=True).stdout
    assert json.loads(out)["value"] == ek.tmmd(g, r)["value"]


def test_dtmmd_parity_with_cli(tmp_path):
    exe = cli()
    rng = np.random.default_rng(6)
    x = rng.normal(size=(48, 3)) + np.repeat(np.eye(3) * 2.0, 16, axis=0)
    ids = [f"s{i}" for i in range(48)]
    labels = [f"k{i // 16}" for i in range(48)]
    write_csv(tmp_path / "g.csv", x, "s")
    with open(tmp_path / "meta.jsonl", "w") as f:
        for sid, label in zip(ids, labels):
            f.write(json.dumps({"sample_id": sid, "class": label}) + "\n")
    out = subprocess.run(
        [exe, "metrics", "dtmmd", "--generated", str(tmp_path / "g.csv"),
         "--meta", str(tmp_path / "meta.jsonl"), "--seed", "9"],
        check=True, capture_output=True, text=True).stdout
    assert json.loads(out)["value"] == ek.dtmmd(x, labels, ids=ids, seed=9)["value"]
