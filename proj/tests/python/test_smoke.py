import json
import math

import numpy as np
import pytest

import wadalab


def test_eps0():
    assert wadalab.EPS0 == pytest.approx(1 - math.sqrt(2) / 2)


def test_five_piece_interval():
    lo, hi = wadalab.rotation_interval(wadalab.five_piece())
    assert lo["exact"] == (-1, 1)
    assert hi["exact"] == (1, 1)
    assert wadalab.pointwise_rotation(wadalab.five_piece(), 0.25) == pytest.approx(1.0)


def test_upper_endpoint_at_eps0():
    lo, hi = wadalab.rotation_interval(wadalab.phi_quotient(wadalab.EPS0))
    assert hi["exact"] == (1, 2)
    assert abs(hi["numeric"] - 0.5) < 1e-4


def test_arnold_small_t_is_flat():
    for t in (0.0, 0.5, 1.0):
        lo, hi = wadalab.rotation_interval(wadalab.arnold(t))
        assert lo["value"] == 0.0 and hi["value"] == 0.0


def test_lift_roundtrip():
    f = wadalab.Lift.piecewise([0.0, 0.5, 1.0], [0.0, 0.75, 1.0])
    assert f(0.25) == pytest.approx(0.375)
    assert f(1.25) == pytest.approx(1.375)
    assert f.monotone()
    j = json.loads(f.to_json())
    assert j["breakpoints"] == [0.0, 0.5, 1.0]
    assert j["values"] == [0.0, 0.75, 1.0]


def test_entropy_closed_form():
    assert wadalab.entropy_closed_form(wadalab.EPS0) == pytest.approx(math.log(1 + math.sqrt(2)))
    assert wadalab.lap_entropy(wadalab.EPS0, 12) == pytest.approx(0.8814, rel=0.05)


def test_g3_shifts():
    assert wadalab.g3_shifts() == [3, 3, 3, 3]


def test_access_five_piece():
    a = wadalab.access("five-piece", side="in", variant="A")
    assert a["forward_rotation"] == 0.0
    assert 0.5 <= a["point"] <= 1.0
    b = wadalab.access("five-piece", side="out", variant="A")
    assert b["forward_rotation"] == 1.0
    with pytest.raises(ValueError):
        wadalab.access("phi-chain", side="in")


def test_basins_small():
    d = wadalab.basins("phi-chain", res=256, depth=2)
    assert d["mask"].shape == (256, 256)
    assert d["labels"].dtype == np.uint8
    # three seeded regions at shallow depth
    assert {1, 2, 3} <= set(np.unique(d["labels"]).tolist())
    assert len(d["wada_scores"]) == 3
