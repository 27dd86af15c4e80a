import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastic_plasmon.errors import DegreeError, ElastoPlasmonError, ResolutionError
from elastic_plasmon.kernels import LameParams, kelvin_matrix
from elastic_plasmon.modes import (
    ModalField,
    ModeIndex,
    SphereGrid,
    hstar_normalizer,
    l2_norm_squared,
    mode_indices,
    project_modal,
    raw_eigenfunction,
    spherical_harmonic,
    synthesize,
    synthesize_on_grid,
)

BG = LameParams.background(2.0, 1.0)
GRID = SphereGrid.gauss(24, 48)
POLE = np.array([0.0, 0.0, 1.0])


def _inner(a, b, grid):
    return np.sum(grid.weights[..., None] * a * np.conj(b))


def test_harmonic_values():
    assert spherical_harmonic(0, 0, POLE) == pytest.approx(1 / np.sqrt(4 * np.pi))
    assert spherical_harmonic(1, 0, POLE) == pytest.approx(np.sqrt(3 / (4 * np.pi)))


def test_harmonic_normalized():
    y = spherical_harmonic(3, 2, GRID.directions())
    assert np.sum(GRID.weights * np.abs(y) ** 2) == pytest.approx(1, abs=1e-10)


def test_harmonics_orthonormal():
    idx = [(n, m) for n in range(6) for m in range(-n, n + 1)]
    ys = np.array([spherical_harmonic(n, m, GRID.directions()) for n, m in idx])
    gram = np.einsum("aij,bij,ij->ab", ys, np.conj(ys), GRID.weights)
    assert np.allclose(gram, np.eye(len(idx)), atol=1e-12)


def test_condon_shortley_phase():
    d = np.array([np.sin(0.4), 0, np.cos(0.4)])
    # Y_1^1 = -sqrt(3/8pi) sin(theta) e^{i phi}
    assert spherical_harmonic(1, 1, d) == pytest.approx(-np.sqrt(3 / (8 * np.pi)) * np.sin(0.4))
    assert spherical_harmonic(2, -1, d) == pytest.approx(-np.conj(spherical_harmonic(2, 1, d)))


def test_pole_eigenfunctions():
    assert np.allclose(raw_eigenfunction(ModeIndex(1, 1, 0), POLE), 0, atol=1e-15)
    assert np.allclose(raw_eigenfunction(ModeIndex(2, 1, 0), POLE), [0, 0, np.sqrt(3 / (4 * np.pi))])


def test_family1_tangential():
    k = raw_eigenfunction(ModeIndex(1, 4, -2), GRID.directions())
    assert np.max(np.abs(np.einsum("ijk,ijk->ij", k, GRID.directions()))) < 1e-13


@pytest.mark.parametrize("idx, r0, expected", [(ModeIndex(1, 2, 0), 1, 6), (ModeIndex(2, 1, 0), 1, 3), (ModeIndex(3, 1, 0), 2, 4)])
def test_l2_norms_match_quadrature(idx, r0, expected):
    assert l2_norm_squared(idx, r0) == pytest.approx(expected)
    k = raw_eigenfunction(idx, GRID.directions())
    assert r0**2 * np.sum(GRID.weights[..., None] * np.abs(k) ** 2) == pytest.approx(expected, rel=1e-12)


def test_eigenfunctions_orthogonal():
    idx = mode_indices(4)
    ks = [raw_eigenfunction(i, GRID.directions()) for i in idx]
    gram = np.array([[_inner(a, b, GRID) for b in ks] for a in ks])
    assert np.allclose(gram, np.diag([l2_norm_squared(i) for i in idx]), atol=1e-12)


def test_hstar_normalizer_value():
    assert hstar_normalizer(ModeIndex(1, 1, 0), 1.0, BG) == pytest.approx(np.sqrt(1.5))


@given(st.integers(1, 3), st.integers(1, 6), st.floats(0.2, 5))
def test_hstar_normalizer_power_law(family, n, r0):
    idx = ModeIndex(family, n, 0)
    # c = (-e r0 l2(r0))^{-1/2} with l2 ~ r0^2
    assert hstar_normalizer(idx, r0, BG) == pytest.approx(hstar_normalizer(idx, 1.0, BG) * r0**-1.5, rel=1e-12)


def test_mode_index_validation():
    with pytest.raises(DegreeError):
        ModeIndex(3, 2, 2)
    with pytest.raises(DegreeError):
        ModeIndex(1, 0, 0)
    with pytest.raises(ElastoPlasmonError):
        ModeIndex(4, 1, 0)


def test_single_mode_projection():
    k = raw_eigenfunction(ModeIndex(1, 3, 1), GRID.directions())
    mf = project_modal(k, GRID, 6, basis="raw", drop_below=1e-12)
    assert list(mf) == [ModeIndex(1, 3, 1)]
    assert mf[ModeIndex(1, 3, 1)] == pytest.approx(1, abs=1e-12)
    assert mf.residual < 1e-12


@given(st.lists(st.tuples(st.sampled_from(mode_indices(5)), st.complex_numbers(max_magnitude=5, allow_nan=False)), min_size=1, max_size=6))
def test_projection_round_trip(entries):
    mf = ModalField(5, dict(entries), "hstar")
    back = project_modal(synthesize_on_grid(mf, GRID, BG), GRID, 5, BG, "hstar")
    scale = max(mf.norm(), 1.0)
    assert all(abs(back[k] - mf[k]) <= 1e-10 * scale for k in mode_indices(5))


def test_projection_resolution_check():
    with pytest.raises(ResolutionError):
        project_modal(np.zeros(GRID.shape + (3,)), GRID, 12)


def test_basis_conversion_preserves_field():
    mf = ModalField(3, {ModeIndex(1, 2, 1): 1 + 2j, ModeIndex(3, 3, -2): 0.5}, "hstar")
    raw = mf.to_basis("raw", 1.3, BG)
    d = GRID.directions()
    assert np.allclose(synthesize(mf, d, 1.3, BG), synthesize(raw, d, 1.3), atol=1e-14)
    assert raw.to_basis("hstar", 1.3, BG)[ModeIndex(1, 2, 1)] == pytest.approx(1 + 2j)


def test_json_round_trip():
    mf = ModalField(3, {ModeIndex(2, 3, -1): 0.25 - 1j, ModeIndex(1, 1, 0): 2.0}, "raw")
    assert ModalField.from_json(mf.to_json()) == mf


def test_point_force_projection_decays_geometrically():
    # Kelvin field of an exterior point force, sampled on the unit sphere
    r_s = 2.5
    src = np.array([0.0, 0.0, r_s])
    grid = SphereGrid.gauss(64, 128)
    pts = grid.points()
    u = kelvin_matrix(pts - src, BG) @ np.array([1.0, 0.0, 0.0])
    mf = project_modal(u, grid, 30, basis="raw", families=(1,))
    amps = np.array([max(abs(mf[ModeIndex(1, n, m)]) for m in (-1, 1)) for n in range(2, 25)])
    n = np.arange(2, 25)
    # |a_n| ~ C n^p r_s^{-n}: fit the power-law prefactor alongside the rate
    coef, *_ = np.linalg.lstsq(np.stack([np.ones_like(n), n, np.log(n)], 1).astype(float), np.log(amps), rcond=None)
    rate = np.exp(coef[1])
    assert rate == pytest.approx(1 / r_s, rel=0.03)
