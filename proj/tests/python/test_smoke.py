# SPDX-License-Identifier: Apache-2.0
#
# sitefb: site-specific limited-feedback beamforming simulation library
# Copyright (C) 2026 The sitefb Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------

import math
from pathlib import Path

import numpy as np
import pytest

import sitefb

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_steering_and_codebook_shapes():
    a = sitefb.steering(0.1, 16)
    assert a.shape == (16,)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-12
    book = sitefb.dft_codebook(16, 4)
    assert book.shape == (16, 64)
    assert np.allclose(np.linalg.norm(book, axis=0), 1.0)


def test_type1_on_grid_beam_is_exact():
    book = sitefb.dft_codebook(16, 4)
    out = sitefb.type1(book[:, 5])
    assert out["indices"] == [5]
    assert out["eta"] == pytest.approx(1.0, abs=1e-12)
    assert out["overhead"] == 17


def test_scheme_ordering_and_psc_identity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        h = sitefb.steering(rng.uniform(-0.5, 0.5), 16) + 0.5 * sitefb.steering(rng.uniform(-0.5, 0.5), 16)
        e1 = sitefb.type1(h)["eta"]
        e2 = [sitefb.type2(h, q)["eta"] for q in (1, 2, 3, 4)]
        assert all(b >= a - 1e-12 for a, b in zip(e2, e2[1:]))
        assert e2[0] >= e1 - 1e-12
        assert sitefb.psc(h, 16)["eta"] == pytest.approx(1.0, abs=1e-12)
    assert sitefb.psc(sitefb.steering(0.2, 16), 4)["eta"] == pytest.approx(0.25, abs=1e-12)


def test_projection_helpers_against_numpy():
    rng = np.random.default_rng(7)
    basis = rng.normal(size=(8, 3)) + 1j * rng.normal(size=(8, 3))
    h = rng.normal(size=8) + 1j * rng.normal(size=8)
    q, _ = np.linalg.qr(basis)
    expect = np.linalg.norm(q.conj().T @ h) ** 2 / np.linalg.norm(h) ** 2
    assert sitefb.capture_efficiency(basis, h) == pytest.approx(expect, abs=1e-12)
    other = rng.normal(size=(8, 3)) + 1j * rng.normal(size=(8, 3))
    q2, _ = np.linalg.qr(other)
    d = q @ q.conj().T - q2 @ q2.conj().T
    delta, bound = sitefb.mismatch_bound(basis, other, h)
    assert delta == pytest.approx(np.linalg.norm(d, 2), abs=1e-9)
    assert sitefb.spectral_norm(d) == pytest.approx(delta, abs=1e-9)


def test_effective_se_closed_form():
    assert sitefb.effective_se(0.5, 100, 10.0, 1000) == pytest.approx(0.9 * math.log2(6.0), abs=1e-12)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        sitefb.type2(np.ones(16, dtype=complex), 20)
    with pytest.raises(ArithmeticError):
        sitefb.type1(np.zeros(16, dtype=complex))
    with pytest.raises(OSError):
        sitefb.Model.load("/nonexistent/model.blml")


def test_train_deploy_and_checkpoint(tmp_path):
    cfg = tmp_path / "small.ini"
    cfg.write_text(
        "seed = 4\n[site]\nn_t = 8\n[schemes]\nk = 4\nq = 2\nn_p = 2\n"
        "[train]\ndepth = 1\nwidth = 8\nbatch_size = 8\nepochs = 2\n"
        "[samples]\ntrain = 40\nval = 10\ntest = 10\n"
    )
    model = sitefb.train(str(cfg), str(tmp_path / "out"))
    assert len(model.trace["epochs"]) == 2
    assert (tmp_path / "out" / "model.blml").exists()
    assert np.allclose(np.linalg.norm(model.probing, axis=0), 1.0)

    channels = sitefb.sample_site(str(cfg), 5, 11)
    assert channels.shape == (5, 8)
    out = model.deploy(channels[0], seed=1)
    assert 0.0 <= out["eta"] <= 1.0
    assert out["overhead"] == 4 + 2 * out["q_or_np"]

    loaded = sitefb.Model.load(str(tmp_path / "out" / "model.blml"))
    again = loaded.deploy(channels[0], seed=1)
    assert again["eta"] == out["eta"]

    summary = sitefb.compare(str(cfg), str(tmp_path / "cmp"), model=loaded)
    assert set(summary) == {"type1", "type2", "psc", "proposed"}
    assert summary["type2"]["mean_eta"] >= summary["type1"]["mean_eta"]
