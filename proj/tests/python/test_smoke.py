import math
from fractions import Fraction

import numpy as np
import pytest

import shallow2d as s2d


def test_sebd_matches_oracle():
    tv = s2d.sebd_total_variation("brickwork", 3, 4, seed=7)
    assert tv < 1e-8


def test_sample_and_probability_agree():
    s = s2d.sample("brickwork", 3, 3, seed=3, sample_seed=4)
    assert not s["failed"]
    assert s["outcome"].shape == (9,)
    p = s2d.probability("brickwork", 3, 3, s["outcome"].tolist(), seed=3)
    assert math.isclose(math.log(p), s["log_probability"], rel_tol=1e-9)
    dist = s2d.exact_distribution("brickwork", 3, 3, seed=3)
    index = int("".join(map(str, s["outcome"])), 2)
    assert math.isclose(dist[index], p, rel_tol=1e-9)
    assert math.isclose(dist.sum(), 1.0, rel_tol=1e-12)


def test_statmech_constants():
    c = s2d.brickwork_couplings(2)
    assert abs(c["J_vert"] - 0.1116) < 5e-4
    assert abs(c["J_horiz"] - 0.3190) < 5e-4
    assert abs(s2d.triangular_critical_q() - 3.249) < 1e-3
    assert s2d.weingarten_k2("e", 2) == Fraction(1, 15)
    assert s2d.weingarten_k2("swap", 2) == Fraction(-1, 60)
    d = s2d.dephased_cmi_infinite_q(2, 2, 2)
    assert abs(d["closed_form"] - (1 - np.euler_gamma) / math.log(2)) < 1e-12
    assert abs(d["extrapolated"] - d["closed_form"]) < 1e-4


def test_quasi_entropy_scan_area_law():
    rows = s2d.quasi_entropy_scan([4, 8], q=2)
    assert all(r["exact"] for r in rows)
    assert abs(rows[0]["s2"] - rows[1]["s2"]) < 1e-3


def test_toy_spectrum_fit():
    spectrum = s2d.toy_model_spectrum(60, steps=60, seed=5)
    assert np.all(np.diff(spectrum) <= 0)
    fit = s2d.spectrum_fit(spectrum.tolist(), 3)
    assert fit["slope"] < 0 and fit["r_squared"] > 0.9


def test_patching_and_cmi():
    x = s2d.patch_sample("brickwork", 3, 4, l=3, allow_short=True)
    assert x.shape == (12,)
    rows = s2d.cmi_decay_scan(rows=2, cols=4, separations=[1, 2], instances=2)
    assert [r["separation"] for r in rows] == [1, 2]
    assert all(r["cmi_mean"] >= -1e-12 for r in rows)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        s2d.sample("hexagonal", 3, 3)
    with pytest.raises(s2d.ResourceCapExceeded):
        s2d.exact_distribution("brickwork", 6, 6)
    with pytest.raises(ValueError):
        s2d.weingarten_k2("cycle", 2)
