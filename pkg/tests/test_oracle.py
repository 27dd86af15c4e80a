import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastic_plasmon.errors import AccuracyError, DomainError, ElastoPlasmonError, ResolutionError
from elastic_plasmon.kernels import LameParams
from elastic_plasmon.modes import ModalField, ModeIndex, raw_eigenfunction
from elastic_plasmon.oracle import (
    QuadratureSpec,
    VolumeSpec,
    default_split_samples,
    extrapolate,
    interior_field,
    single_layer_quadrature,
    verify_eigenrelation,
    verify_gamma_split,
    verify_jump,
    volume_energy,
)
from elastic_plasmon.spectrum import PlasmonConfig, sl_eigenvalue

BG = LameParams.background(2.0, 1.0)


@pytest.mark.parametrize("idx", [ModeIndex(1, 1, 0), ModeIndex(3, 2, 1), ModeIndex(2, 3, -2)])
def test_eigenrelation_by_quadrature(idx):
    rep = verify_eigenrelation(idx, 1.0, BG)
    assert rep.passed, rep.rel_error
    assert rep.extra["continuity_gap"] < 1e-4
    assert rep.extra["traction_rel_error"] < 1e-3


def test_eigenrelation_scales_with_radius():
    rep = verify_eigenrelation(ModeIndex(1, 2, 0), 1.7, BG)
    assert rep.measured == pytest.approx(sl_eigenvalue(1, 2, BG), rel=1e-4)


def test_eigenrelation_complex_parameters():
    p = LameParams.plasmon(BG, 1.0, -2.5, 1e-2)
    rep = verify_eigenrelation(ModeIndex(1, 3, 0), 1.0, p)
    assert rep.passed, rep.rel_error


@pytest.mark.parametrize("idx", [ModeIndex(1, 1, 0), ModeIndex(2, 1, 0)])
def test_jump_of_rigid_modes(idx):
    # these densities generate a layer with zero interior traction
    rep = verify_jump(ModalField(1, {idx: 1.0}, "raw"), 1.0, BG)
    assert rep.passed
    assert rep.extra["interior_traction_max"] < 1e-3
    assert rep.extra["exterior_coeff"] == pytest.approx(1, abs=1e-3)


def test_jump_of_mixed_density():
    dens = ModalField(3, {ModeIndex(1, 2, 1): 1.0, ModeIndex(3, 3, -1): 0.5j, ModeIndex(2, 2, 0): -0.3}, "raw")
    assert verify_jump(dens, 1.0, BG).passed


def test_zero_density():
    assert np.array_equal(single_layer_quadrature(ModalField(2, {}), np.array([0, 0, 2.0]), 1.0, BG), np.zeros(3))


def test_target_too_close_rejected():
    dens = ModalField(1, {ModeIndex(1, 1, 0): 1.0}, "raw")
    with pytest.raises(AccuracyError):
        single_layer_quadrature(dens, np.array([0, 0, 1.001]), 1.0, BG)


def test_interior_layer_matches_profile():
    idx = ModeIndex(1, 2, 1)
    d = np.array([0.3, 0.5, 0.8]) / np.linalg.norm([0.3, 0.5, 0.8])
    u = single_layer_quadrature(ModalField(2, {idx: 1.0}, "raw"), 0.5 * d, 1.0, BG)
    expected = sl_eigenvalue(1, 2, BG) * 0.25 * raw_eigenfunction(idx, d)
    assert np.allclose(u, expected, rtol=1e-6, atol=1e-9)


def test_exterior_layer_decay():
    idx = ModeIndex(1, 3, 0)
    dens = ModalField(3, {idx: 1.0}, "raw")
    d = np.array([0.6, 0.0, 0.8])
    a = single_layer_quadrature(dens, 2.0 * d, 1.0, BG)
    b = single_layer_quadrature(dens, 4.0 * d, 1.0, BG)
    assert np.allclose(b, a / 16, rtol=1e-6, atol=1e-12)


def test_spec_validation():
    with pytest.raises(ElastoPlasmonError):
        QuadratureSpec(offsets=(0.01, 0.02))
    with pytest.raises(ElastoPlasmonError):
        QuadratureSpec(offsets=(0.02, 0.01), order=2)
    with pytest.raises(ElastoPlasmonError):
        QuadratureSpec(method="adaptive")


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_extrapolate_exact_for_polynomials(c):
    h = np.array([0.04, 0.02, 0.01, 0.005])
    v = c[0] + c[1] * h + c[2] * h**2
    assert extrapolate(h, v, 2) == pytest.approx(c[0], abs=1e-10)


def test_volume_energy_of_rigid_motion_is_zero():
    rot = lambda p: np.cross(np.array([0.0, 0.0, 1.0]), p).astype(complex)
    assert volume_energy(rot, 0.1, BG, 1.0) == pytest.approx(0, abs=1e-10)


def test_volume_energy_uniform_strain():
    # u = x: div u = 3, sym grad u = I, density 9 lam + 6 mu over the unit ball
    e = volume_energy(lambda p: p.astype(complex), 1.0, BG, 1.0, vspec=VolumeSpec(n_radial=8, n_theta=8, n_phi=16))
    assert e == pytest.approx((9 * 2.0 + 6 * 1.0) * 4 * np.pi / 3, rel=1e-9)


def test_volume_energy_validation():
    with pytest.raises(ElastoPlasmonError):
        volume_energy(lambda p: p, 1.0, BG, 1.0, 2.0)
    with pytest.raises(ResolutionError):
        volume_energy(lambda p: p, 1.0, BG, 1.0, vspec=VolumeSpec(n_radial=1))


def test_interior_field_family1_only():
    cfg = PlasmonConfig(1.0, -2.0, 1e-2, BG)
    with pytest.raises(DomainError):
        interior_field(ModalField(2, {ModeIndex(2, 2, 0): 1.0}), cfg)


def test_split_exact_at_zero_frequency():
    rep = verify_gamma_split([(np.array([0.4, 0.2, 0.9]), 0.0)], BG)
    assert rep.measured == 0


def test_split_default_samples():
    rep = verify_gamma_split(None, BG)
    assert rep.passed and rep.measured <= 1e-10
    assert rep.params["n_samples"] == len(default_split_samples())
    assert json.loads(rep.to_json())["pass"] is True


def test_split_residual_monotone_in_terms():
    res = [verify_gamma_split(None, BG, n_terms=k).measured for k in (2, 4, 8, 16)]
    assert all(b <= a for a, b in zip(res, res[1:]))


def test_split_frequency_range():
    with pytest.raises(ElastoPlasmonError):
        verify_gamma_split([(np.array([1.0, 0, 0]), 0.5)], BG)


@settings(max_examples=20)
@given(st.floats(0.1, 5), st.floats(0.1, 5))
def test_split_holds_for_convex_backgrounds(lam, mu):
    assert verify_gamma_split(None, LameParams.background(lam, mu)).passed
