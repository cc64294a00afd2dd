import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stap_sim import effective, numerics, model
from stap_sim.model import Scheme, SchemeSpec

EPS = math.asin(0.25)
OMEGA0 = math.sqrt(45) * math.pi / 20
couplings = st.floats(min_value=-3, max_value=3, allow_nan=False)


def h_im(v, lam):
    return effective.chain_hamiltonian(0.0, 0.0, v, lam)


@pytest.mark.parametrize("v,lam", [(1, 1), (0.5, 2), (2, 1), (1.3, 0.7)])
def test_zeno_eigensystem(v, lam):
    z = effective.intermediate_eigensystem(v, lam)
    vecs = np.array([z.phi0, *z.phis])
    assert np.allclose(vecs @ vecs.T, np.eye(5), atol=1e-12)
    for vec, e in zip(vecs, z.energies):
        assert np.linalg.norm(h_im(v, lam) @ vec - e * vec) <= 1e-10
    assert abs(z.phi0 @ h_im(v, lam) @ z.phi0) < 1e-15


def test_phi0_at_unit_couplings():
    z = effective.intermediate_eigensystem(1.0, 1.0)
    assert abs(z.chi - math.sqrt(3)) < 1e-15
    assert np.allclose(z.phi0[[1, 3, 5]], np.array([1, -1, 1]) / math.sqrt(3))


def test_spectrum_at_v2():
    z = effective.intermediate_eigensystem(2.0, 1.0)
    assert z.chi == 3.0
    w, _ = numerics.hermitian_eigs(h_im(2.0, 1.0)[1:6, 1:6])
    assert np.allclose(np.sort(z.energies), w, atol=1e-10)


def test_partition():
    z = effective.intermediate_eigensystem(1.0, 1.0)
    part = z.partition
    assert [len(part[k]) for k in ("S0", "S1", "S2")] == [1, 2, 2]
    h = h_im(1.0, 1.0)
    # h_im is block diagonal across the partition
    for a in part["S1"]:
        for b in (*part["S0"], *part["S2"]):
            assert abs(a @ h @ b) < 1e-12


def test_H_re_static_part():
    h = effective.build_H_re(0.0, 0.0, 1.0, 1.0)
    nz = {(i, j) for i, j in zip(*np.nonzero(np.abs(h) > 1e-15)) if i < j}
    assert nz == {(3, 4), (5, 6)}
    assert h[3, 4] == 1.0 and abs(h[5, 6] - math.sqrt(3)) < 1e-15


def test_H_re_phi0_psi1_coupling():
    h = effective.build_H_re(0.8, 0.3, 1.4, 1.1)
    chi = math.sqrt(2 * 1.4 ** 2 + 1.1 ** 2)
    assert abs(h[2, 0] - 1.4 * 0.8 / chi) < 1e-15


def test_H_re_is_a_basis_change():
    rng = np.random.default_rng(7)
    rot = effective.rotated_basis(1.0, 1.0)
    for _ in range(100):
        o1, o2 = rng.uniform(-2, 2, size=2)
        chain = effective.chain_hamiltonian(o1, o2, 1.0)
        h_re = effective.build_H_re(o1, o2, 1.0)
        assert np.max(np.abs(rot.T @ chain @ rot - h_re)) < 1e-12
        w1, _ = numerics.hermitian_eigs(h_re)
        w2, _ = numerics.hermitian_eigs(chain)
        assert np.max(np.abs(w1 - w2)) <= 1e-9


def test_H_m_single_drive():
    h = effective.build_H_m(0.0, 0.9, 1.0, 1.0)
    expect = np.zeros((3, 3))
    expect[1, 2] = expect[2, 1] = 0.9 / math.sqrt(3)
    assert np.allclose(h, expect)


@settings(max_examples=50, deadline=None)
@given(couplings, couplings)
def test_H_m_dark_row(o1, o2):
    d = np.array([o2, 0.0, -o1])
    if np.linalg.norm(d) < 1e-6:
        return
    assert np.linalg.norm(effective.build_H_m(o1, o2, 1.0) @ d / np.linalg.norm(d)) < 1e-12


def test_dark_state_limits():
    assert np.allclose(effective.dark_state(0.0, 1.2), [1, 0, 0])
    d = effective.dark_state(0.7, 0.0)
    assert abs(abs(d[1]) - 1) < 1e-15
    with pytest.raises(ValueError):
        effective.dark_state(0.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(couplings, couplings, st.floats(min_value=0.2, max_value=3))
def test_dark_state_in_kernel(o1, o2, v):
    if abs(o1) + abs(o2) < 1e-6:
        return
    d = np.zeros(7)
    d[[0, 1, 4]] = effective.dark_state(o1, o2)
    assert np.linalg.norm(effective.build_H_re(o1, o2, v) @ d) <= 1e-12
    chain = effective.dark_state_chain(o1, o2, v)
    assert np.linalg.norm(effective.chain_hamiltonian(o1, o2, v) @ chain) <= 1e-12


def test_ratio_infinite_at_equal_drives():
    assert effective.ratio_r(0.5, 0.5) == math.inf


def test_ratio_reference_amplitude_beta_zero():
    r = effective.ratio_r(OMEGA0, 0.0)
    a = OMEGA0 ** 2
    expect = (math.sqrt(25 * a * a + 12 * a + 36) + 7) / (2 * math.sqrt(6) * a)
    assert abs(r - expect) < 1e-12
    assert r * r > 8  # φ0 dominates μ1 in the near-zero mode


@pytest.mark.parametrize("beta", [b for b in np.linspace(0, math.pi / 2, 20)
                                  if abs(b - math.pi / 4) > 1e-3])
def test_ratio_closed_form_vs_numeric(beta):
    o1, o2 = math.sin(beta), math.cos(beta)  # Ω0 = λ, where the closed form is exact
    r = effective.ratio_r(o1, o2)
    rn = effective.ratio_r_numeric(o1, o2)
    assert abs(r - rn) <= 1e-6 * max(1.0, r)


def test_ratio_closed_form_is_approximate_off_unit_amplitude():
    o1, o2 = OMEGA0 * math.sin(0.2), OMEGA0 * math.cos(0.2)
    r, rn = effective.ratio_r(o1, o2), effective.ratio_r_numeric(o1, o2)
    assert 1e-4 < abs(r - rn) / rn < 0.02


def test_mu2_population_values():
    assert effective.mu2_population(0.0, EPS, 10.0, 1.0) == 0
    c = math.sqrt(45) * math.pi / 4
    p = effective.mu2_population(math.pi / 4, EPS, 10.0, 1.0)
    assert abs(p - 2 * c * c / (100 + 2 * c * c)) < 1e-12


def test_mu2_population_decreases_in_t_f():
    vals = [effective.mu2_population(math.pi / 4, EPS, tf, 1.0) for tf in np.linspace(5, 40, 30)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_main_system_vs_full_chain():
    spec = SchemeSpec(Scheme.FPT)
    p = model.stap_protocol(spec)
    psi = numerics.propagate_state(effective.main_hamiltonian(p),
                                   np.array([1, 0, 0], dtype=complex), [0, 10], 0.005)[-1]
    full = numerics.propagate_state(model.hamiltonian_fn(spec, p),
                                    model.initial_state(spec), [0, 10], 0.005)[-1]
    f3 = abs(psi[2]) ** 2
    f8 = abs(full[6]) ** 2
    assert abs(f3 - f8) <= 0.02
