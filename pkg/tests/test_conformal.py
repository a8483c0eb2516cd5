"""Conformal maps, pullback weights, and the image-torsion ratio sweep."""

import math

import numpy as np
import pytest

import torsionlab as tl
from torsionlab import conformal
from torsionlab.errors import DomainError


def test_map_registry_radii():
    assert tl.map_from_spec("quad:0.8").univalence_radius == pytest.approx(0.625)
    assert tl.map_from_spec("quad:0.3").univalence_radius == pytest.approx(1.0)
    assert tl.map_from_spec("moebius:2").univalence_radius == pytest.approx(0.5)
    assert tl.map_from_spec("cubic:3").univalence_radius == pytest.approx(
        1.0 / math.sqrt(9.0))
    assert tl.map_from_spec("linear:2").univalence_radius == math.inf
    with pytest.raises(ValueError):
        tl.map_from_spec("linear:0")
    with pytest.raises(ValueError):
        tl.map_from_spec("spiral:1")


def test_map_param_parsing():
    cm = tl.map_from_spec("quad:0.1,0.2")
    z = np.array([0.5 + 0.0j])
    assert complex(np.asarray(cm.eval(z))[0]) == pytest.approx(
        0.5 + complex(0.1, 0.2) * 0.25)
    shift = tl.map_from_spec("linear:1:3,4")
    assert complex(np.asarray(shift.eval(np.array([0j])))[0]) == pytest.approx(
        complex(3, 4))


def test_pullback_weight_values(disk40):
    cm = tl.map_from_spec("quad:0.2")
    w = tl.pullback_weight(cm, tl.build_disk_mesh(0.5, 10))
    # |f'(z)|^2 = |1 + 2 c z|^2, equals 1 at the center vertex
    assert w.values[0] == pytest.approx(1.0)
    m = tl.build_disk_mesh(0.5, 10)
    z = m.vertices[:, 0] + 1j * m.vertices[:, 1]
    np.testing.assert_allclose(w.values, np.abs(1 + 0.4 * z) ** 2, rtol=1e-12)
    # unit disk reaches the univalence radius of moebius:2
    with pytest.raises(DomainError):
        tl.pullback_weight(tl.map_from_spec("moebius:2"), disk40)


def test_rigidity_of_image_routes_agree():
    cm = tl.map_from_spec("quad:0.2")
    t_pull = tl.rigidity_of_image(cm, 0.5, 0.0, n_rings=24)
    t_direct = tl.rigidity_of_image(cm, 0.5, 0.0, n_rings=24, route="direct")
    assert t_pull == pytest.approx(t_direct, rel=1e-2)
    with pytest.raises(ValueError):
        tl.rigidity_of_image(cm, 0.5, 0.0, route="sideways")
    with pytest.raises(DomainError):
        tl.rigidity_of_image(tl.map_from_spec("moebius:2"), 0.7, 0.0)


def test_linear_map_ratio_constant():
    # f = 2z scales the disk: Phi = 2^(4/(1-gamma)) = 16 at gamma = 0, all r
    rows = tl.schwarz_ratio_sweep(tl.map_from_spec("linear:2"), 0.0,
                                  [0.3, 0.6], n_rings=24)
    assert [set(r) for r in rows] == [{"r", "T_image", "T_disk", "Phi"}] * 2
    for row in rows:
        assert row["Phi"] == pytest.approx(16.0, rel=1e-2)
    assert tl.phi_small_r_limit(tl.map_from_spec("linear:2"), 0.0) == 16.0


def test_schwarz_sweep_validation():
    cm = tl.map_from_spec("quad:0.2")
    with pytest.raises(ValueError):
        tl.schwarz_ratio_sweep(cm, 0.0, [0.5, 0.4])
    with pytest.raises(ValueError):
        tl.schwarz_ratio_sweep(cm, 0.0, [])
    with pytest.raises(DomainError):
        tl.schwarz_ratio_sweep(tl.map_from_spec("moebius:2"), 0.0, [0.2, 0.6])


def test_phi_small_r_limit_values():
    cm = tl.map_from_spec("linear:3")
    assert tl.phi_small_r_limit(cm, 0.0) == pytest.approx(81.0)
    assert tl.phi_small_r_limit(cm, 0.5) == pytest.approx(3.0**8)
    # f'(0) = 1 for the normalized maps
    assert tl.phi_small_r_limit(tl.map_from_spec("quad:0.4"), 0.3) == 1.0


def test_monotonicity_verdict_units():
    up = tl.monotonicity_verdict([1.0, 1.1, 1.25])
    assert up["nondecreasing"] and up["strict"]
    flat = tl.monotonicity_verdict([1.0, 1.0 + 2e-5, 1.0 - 2e-5])
    assert flat["nondecreasing"] and not flat["strict"]
    down = tl.monotonicity_verdict([1.0, 0.9])
    assert not down["nondecreasing"]
    assert down["min_forward_diff"] == pytest.approx(-0.1)
    with pytest.raises(ValueError):
        tl.monotonicity_verdict([1.0])


def test_quad_map_phi_grows(oracle_flat_g0):
    # Phi(r) = 1 + 4 |c|^2 r^2 + O(r^4) for f = z + c z^2; check growth
    # and the leading coefficient on a short grid
    cm = tl.map_from_spec("quad:0.3")
    rows = tl.schwarz_ratio_sweep(cm, 0.0, [0.3, 0.5, 0.7], n_rings=32)
    phi = np.array([row["Phi"] for row in rows])
    verdict = tl.monotonicity_verdict(phi)
    assert verdict["nondecreasing"] and verdict["strict"]
    assert phi[0] == pytest.approx(1.0 + 4 * 0.09 * 0.09, rel=2e-2)
    # T_disk comes from the radial oracle: pi r^4 / 8 at gamma = 0
    assert rows[1]["T_disk"] == pytest.approx(math.pi * 0.5**4 / 8, rel=1e-9)


def test_image_variation_diagnostic():
    # one-sided flux recovery dominates the defect, about 2/n relative
    rep = tl.image_variation_diagnostic(tl.map_from_spec("quad:0.2"), 0.0,
                                        0.5, n_rings=24)
    assert rep.rel_err < 6e-2
    with pytest.raises(DomainError):
        tl.image_variation_diagnostic(tl.map_from_spec("moebius:2"), 0.0, 0.9)
