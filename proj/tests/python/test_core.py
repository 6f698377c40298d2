import math

import numpy as np
import pytest

import optotherm as ot


def test_version():
    assert ot.__version__.count(".") == 2


def test_probe_state_is_a_density_matrix():
    rho = ot.probe_state(alpha=2.0, nbar=0.5, g=0.3, tau=math.pi)
    assert rho.shape == (ot.coherent_cutoff(2.0) + 1,) * 2
    assert np.allclose(rho, rho.conj().T, atol=1e-14)
    assert abs(np.trace(rho) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-10


def test_oracle_matches_closed_form():
    rho = ot.probe_state(1.0, 0.5, 0.3, math.pi)
    oracle = ot.bipartite_oracle(1.0, 0.5, 0.3, math.pi)
    assert np.max(np.abs(rho - oracle)) < 1e-6


def test_fisher_ordering_and_kerr_invariance():
    g = ot.find_gmax(3.0, 0.25, math.pi).g_max
    chi = 2 * math.pi * g * g
    fq = ot.qfi(3.0, 0.25, g, math.pi)
    assert ot.qfi(3.0, 0.25, g, math.pi, chi=chi) == pytest.approx(fq, rel=1e-8)
    fc = ot.cfi_homodyne(3.0, 0.25, g, math.pi, phi_lo=0.0, chi=chi)
    assert 0.9 * fq <= fc <= fq + 1e-6
    opt = ot.optimal_phi_lo(3.0, 0.25, g, math.pi, chi=chi)
    assert ot.distance_mod_pi(opt.phi_star) < 0.02


def test_gmax_anchor():
    r = ot.find_gmax(2.0, 1.0, math.pi)
    assert abs(r.g_max - 0.3) <= 0.05
    assert not r.on_boundary


def test_wigner_of_vacuum():
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = 1
    assert ot.wigner_point(rho, 0.0, 0.0) == pytest.approx(1 / math.pi, rel=1e-12)
    q, p, w = ot.wigner_grid(rho, half_width=6.0, points=121)
    assert w.shape == (121, 121)
    dq = q[1] - q[0]
    assert w.sum() * dq * dq == pytest.approx(1.0, abs=1e-6)


def test_gaussian_closed_forms():
    args = (0.2, 3.0, 0.5, math.pi)
    assert np.max(np.abs(ot.sigma_L(*args) - ot.sigma_L_closed_form(*args))) < 1e-10
    assert ot.gaussian_qfi(*args) == pytest.approx(ot.gaussian_qfi_closed_form(*args), rel=1e-10)
    hom = ot.generaldyne_cfi(*args, z=1e-6, theta=1.0)
    assert hom == pytest.approx(ot.homodyne_cfi_closed_form(0.2, 3.0, 0.5, 1.0), rel=1e-4)


def test_temperature_round_trip():
    n = ot.nbar_from_temperature(1e-3, 2 * math.pi * 1e7)
    assert ot.temperature_from_nbar(n, 2 * math.pi * 1e7) == pytest.approx(1e-3, rel=1e-12)
    h = 1e-9
    slope = (ot.nbar_from_temperature(1e-3 + h, 2 * math.pi * 1e7) - ot.nbar_from_temperature(1e-3 - h, 2 * math.pi * 1e7)) / (2 * h)
    assert ot.dnbar_dtemperature(1e-3, 2 * math.pi * 1e7) == pytest.approx(slope, rel=1e-5)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ot.TruncationError):
        ot.probe_state(3.0, 0.25, 0.3, math.pi, n_max=10)
    with pytest.raises(ValueError):
        ot.qfi(2.0, -1.0, 0.3, math.pi)
    with pytest.raises(ot.PrecisionError):
        ot.cfi_homodyne(3.0, 0.25, 0.38, math.pi, quad_points=5)
