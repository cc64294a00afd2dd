"""Named self-checks run by ``stap-sim verify``.

Every check is deterministic; the report lists one PASS/FAIL line per check
with the worst residual found.  ``hcf_sign=-1`` flips the c2-side
cavity-fiber coupling so the suite can be shown to catch a broken model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dynamics, effective, invariant, model, numerics
from .invariant import InvariantParams, PulseProtocol
from .model import Scheme, SchemeSpec

EPS_REF = math.asin(0.25)
EPSILONS = (math.asin(0.25), math.asin(0.125), 0.3)
GRID = 101


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _within(name: str, value: float, tol: float, what: str = "max residual") -> CheckResult:
    ok = bool(np.isfinite(value) and value <= tol)
    return CheckResult(name, ok, f"{what} {value:.3e} (tol {tol:.0e})")


def check_pulse_amplitude(hcf_sign: float) -> CheckResult:
    p = PulseProtocol(kind="STAP", t_f=10.0, v=1.0, lam=1.0, epsilon=EPS_REF)
    exact = math.sqrt(45.0) * math.pi / 20.0
    table = invariant.pulse_table(p)
    err = max(abs(p.omega0 - exact), abs(table[:, 1:].max() - exact))
    return _within("pulse_amplitude", err, 1e-12, "amplitude error")


def check_jacobi_spectrum(hcf_sign: float) -> CheckResult:
    worst = 0.0
    for v in np.linspace(0.25, 2.0, 8):
        for lam in (0.5, 1.0, 2.0):
            h = effective.chain_hamiltonian(0.0, 0.0, float(v), lam)[1:6, 1:6]
            w, vecs = numerics.hermitian_eigs(h.astype(complex))
            c = invariant.chi(float(v), lam)
            worst = max(worst, float(np.max(np.abs(w - np.sort([0.0, lam, -lam, c, -c])))))
            worst = max(worst, float(np.max(np.abs(h @ vecs - vecs * w))))
    return _within("jacobi_spectrum", worst, 1e-10)


def check_zeno_spectrum(hcf_sign: float) -> CheckResult:
    """Closed-form Zeno eigenpairs and the rotated Hamiltonian, on every scheme's own H."""
    worst = 0.0
    ts = np.linspace(0.0, 10.0, GRID)
    for scheme in Scheme:
        for v in (0.5, 1.0, 1.7):
            spec = SchemeSpec(scheme, v=v)
            emb = model.chain_embedding(spec)
            h0, d1, d2 = model.hamiltonian_parts(spec, hcf_sign=hcf_sign)
            z = effective.intermediate_eigensystem(v, spec.lam)
            for vec, e in zip((z.phi0, *z.phis), z.energies):
                worst = max(worst, float(np.linalg.norm(h0 @ emb @ vec - e * (emb @ vec))))
            rot = emb @ effective.rotated_basis(v, spec.lam)
            p = model.stap_protocol(spec)
            o1, o2 = p.pulses()
            for t in ts[::10]:
                h = h0 + o1(t) * d1 + o2(t) * d2
                h_re = effective.build_H_re(o1(t), o2(t), v, spec.lam)
                worst = max(worst, numerics.matrix_norm_max(rot.conj().T @ h @ rot - h_re))
    return _within("zeno_spectrum_equivalence", worst, 1e-10)


def check_dark_kernel(hcf_sign: float) -> CheckResult:
    p = PulseProtocol(kind="STAP", t_f=10.0, epsilon=EPS_REF)
    o1, o2 = p.pulses()
    worst = 0.0
    for t in np.linspace(0.0, 10.0, GRID):
        a, b = o1(t), o2(t)
        if a == 0 and b == 0:
            continue
        d = np.zeros(5)
        d[[0, 1, 4]] = effective.dark_state(a, b)
        worst = max(worst, float(np.linalg.norm(effective.build_H_eff(a, b, 1.0) @ d)))
    return _within("dark_state_kernel", worst, 1e-12)


def _invariant_derivative(params: InvariantParams, t: float) -> np.ndarray:
    g, b = params.gamma(t), params.beta(t)
    d_b = np.zeros((3, 3), dtype=complex)
    d_b[1, 0] = math.cos(g) * math.cos(b)
    d_b[1, 2] = -math.cos(g) * math.sin(b)
    d_g = np.zeros((3, 3), dtype=complex)
    d_g[1, 0] = -math.sin(g) * math.sin(b)
    d_g[1, 2] = -math.sin(g) * math.cos(b)
    d_g[2, 0] = 1j * math.cos(g)
    m = params.beta_dot(t) * d_b + params.gamma_dot(t) * d_g
    return params.chi0 * (m + m.conj().T)


def _main_system(eps: float, t_f: float = 10.0, v: float = 1.0, lam: float = 1.0):
    p = PulseProtocol(kind="STAP", t_f=t_f, v=v, lam=lam, epsilon=eps)
    return p, InvariantParams.linear(eps, t_f), effective.main_hamiltonian(p)


def check_invariant_residual(hcf_sign: float) -> CheckResult:
    worst = 0.0
    for eps in EPSILONS:
        p, params, h_m = _main_system(eps)
        for t in np.linspace(0.0, p.t_f, GRID):
            i_op = invariant.invariant_operator(params, t)
            res = 1j * _invariant_derivative(params, t) - numerics.commutator(h_m(t), i_op)
            worst = max(worst, numerics.matrix_norm_max(res) / (params.chi0 * p.lam))
    return _within("invariant_residual", worst, 1e-6)


def check_lr_phases(hcf_sign: float) -> CheckResult:
    worst = 0.0
    for eps in EPSILONS:
        p, params, h_m = _main_system(eps)
        target = math.pi / (2 * math.sin(eps))
        worst = max(worst,
                    abs(invariant.lr_phase(1, p.t_f, params, h_m) + target),
                    abs(invariant.lr_phase(-1, p.t_f, params, h_m) - target),
                    abs(invariant.lr_phase(0, p.t_f, params, h_m)))
    return _within("lr_phases", worst, 1e-6, "phase error")


def check_exact_final_state(hcf_sign: float) -> CheckResult:
    worst = 0.0
    for eps in EPSILONS:
        p, _, h_m = _main_system(eps)
        psi = numerics.propagate_state(h_m, np.array([1, 0, 0], dtype=complex), [0.0, p.t_f],
                                       p.t_f / 4000)[-1]
        exact = invariant.analytic_final_state(eps)
        worst = max(worst, 1.0 - abs(np.vdot(exact, psi)) ** 2)
    return _within("exact_final_state", worst, 1e-6, "overlap deficit")


def check_eigenstate_transport(hcf_sign: float) -> CheckResult:
    p, params, h_m = _main_system(EPS_REF)
    ts = np.linspace(0.0, p.t_f, 11)
    worst = 0.0
    for mode in invariant.MODES:
        start = invariant.invariant_eigenstates(params.gamma(0.0), params.beta(0.0))[mode]
        traj = numerics.propagate_state(h_m, start, ts, p.t_f / 4000)
        for t, psi in zip(ts, traj):
            phase = invariant.lr_phase(mode, float(t), params, h_m)
            theta = invariant.invariant_eigenstates(params.gamma(t), params.beta(t))[mode]
            worst = max(worst, float(np.linalg.norm(psi - np.exp(1j * phase) * theta)))
    return _within("eigenstate_transport", worst, 1e-6)


def _closed_states(spec: SchemeSpec, hcf_sign: float, num: int = GRID) -> np.ndarray:
    p = model.stap_protocol(spec)
    ts = np.linspace(0.0, spec.t_f, num)
    h = model.hamiltonian_fn(spec, p, hcf_sign=hcf_sign)
    return numerics.propagate_state(h, model.initial_state(spec), ts, spec.t_f / 2000)


def check_scheme_isomorphism(hcf_sign: float) -> CheckResult:
    """H(t)V = V H_chain(t) on every scheme, then the stated trajectory maps."""
    worst = 0.0
    for scheme in Scheme:
        spec = SchemeSpec(scheme)
        emb = model.chain_embedding(spec)
        o1, o2 = model.stap_protocol(spec).pulses()
        h = model.hamiltonian_fn(spec, model.stap_protocol(spec), hcf_sign=hcf_sign)
        for t in np.linspace(0.0, spec.t_f, GRID):
            chain = effective.chain_hamiltonian(o1(t), o2(t), spec.v, spec.lam)
            worst = max(worst, numerics.matrix_norm_max(h(t) @ emb - emb @ chain))
    fpt = _closed_states(SchemeSpec(Scheme.FPT), hcf_sign)
    tr_spec = SchemeSpec(Scheme.TRANSFER)
    transfer = _closed_states(tr_spec, hcf_sign)
    worst = max(worst, float(np.max(np.abs(transfer - fpt[:, :7] @ model.chain_embedding(tr_spec).T))))
    w2 = SchemeSpec(Scheme.W, m=2)
    mapped = _closed_states(w2, hcf_sign) @ model.w_to_twoatom_map(w2).T
    worst = max(worst, float(np.max(np.abs(mapped - _closed_states(SchemeSpec(Scheme.BELL_TWOATOM), hcf_sign)))))
    aux = _closed_states(SchemeSpec(Scheme.BELL_AUX), hcf_sign)
    for m in (2, 3):
        worst = max(worst, float(np.max(np.abs(_closed_states(SchemeSpec(Scheme.GHZ, m=m), hcf_sign) - aux))))
    return _within("scheme_isomorphism", worst, 1e-9)


def check_w_m_independence(hcf_sign: float) -> CheckResult:
    fids = []
    for m in (3, 7):
        spec = SchemeSpec(Scheme.W, m=m).with_decay(0.05)
        fids.append(dynamics.run(spec, model.stap_protocol(spec), open_system=True,
                                 samples=11, hcf_sign=hcf_sign).final_fidelity)
    return _within("w_state_m_independence", abs(fids[0] - fids[1]), 0.01, "fidelity gap")


def check_lindblad_closure(hcf_sign: float) -> CheckResult:
    spec = SchemeSpec(Scheme.FPT)
    p = model.stap_protocol(spec)
    h = model.hamiltonian_fn(spec, p, hcf_sign=hcf_sign)
    ts = np.linspace(0.0, spec.t_f, 11)
    psi0 = model.initial_state(spec)
    psis = numerics.propagate_state(h, psi0, ts, spec.t_f / 2000)
    rhos = numerics.propagate_density(h, [], np.outer(psi0, psi0.conj()), ts, spec.t_f / 2000)
    worst = max(numerics.matrix_norm_max(r - np.outer(s, s.conj())) for r, s in zip(rhos, psis))
    return _within("lindblad_closure", worst, 1e-8)


def check_trace_audit(hcf_sign: float) -> CheckResult:
    worst_trace, worst_neg = 0.0, 0.0
    for scheme in Scheme:
        spec = SchemeSpec(scheme).with_decay(0.1)
        traj = dynamics.run(spec, model.stap_protocol(spec), open_system=True, samples=51,
                            hcf_sign=hcf_sign).trajectory
        worst_trace = max(worst_trace, float(np.max(np.abs(traj.trace - 1.0))))
        worst_neg = max(worst_neg, float(-traj.min_eigenvalue.min()))
    ok = worst_trace <= 1e-6 and worst_neg <= 1e-6
    return CheckResult("trace_audit", ok,
                       f"trace drift {worst_trace:.3e}, negativity {max(worst_neg, 0.0):.3e} (tol 1e-06)")


def check_mu2_formula(hcf_sign: float) -> CheckResult:
    spec = SchemeSpec(Scheme.FPT)
    res = dynamics.run(spec, model.stap_protocol(spec), hcf_sign=hcf_sign)
    predicted = effective.mu2_population(math.pi / 4, spec.epsilon, spec.t_f, spec.v, spec.lam)
    gap = abs(res.max_intermediate["mu2"] - predicted)
    return _within("mu2_population_formula", gap, 0.05, "max-population gap")


def rk4_order_ratio(steps: int = 200, t_f: float = 10.0, omega: float = 1.0) -> float:
    """Error ratio e(h)/e(h/2) for a resonant two-level Rabi flop (ideal: 16)."""
    h = np.array([[0.0, omega], [omega, 0.0]], dtype=complex) / 2
    psi0 = np.array([1.0, 0.0], dtype=complex)
    exact = np.array([math.cos(omega * t_f / 2), -1j * math.sin(omega * t_f / 2)])
    errs = []
    for n in (steps, 2 * steps):
        psi = numerics.propagate_state(lambda t: h, psi0, [0.0, t_f], t_f / n)[-1]
        errs.append(float(np.linalg.norm(psi - exact)))
    return errs[0] / errs[1]


def check_rk4_order(hcf_sign: float) -> CheckResult:
    ratio = rk4_order_ratio()
    return CheckResult("rk4_order", 12.0 <= ratio <= 20.0, f"error ratio {ratio:.3f} (want 12..20)")


CHECKS: tuple[Callable[[float], CheckResult], ...] = (
    check_pulse_amplitude, check_jacobi_spectrum, check_zeno_spectrum, check_dark_kernel,
    check_invariant_residual, check_lr_phases, check_exact_final_state,
    check_eigenstate_transport, check_scheme_isomorphism, check_w_m_independence,
    check_lindblad_closure, check_trace_audit, check_mu2_formula, check_rk4_order,
)


def run_checks(hcf_sign: float = 1.0) -> list[CheckResult]:
    out = []
    for check in CHECKS:
        try:
            out.append(check(hcf_sign))
        except Exception as exc:  # a crashing check is a failing check
            name = check.__name__.removeprefix("check_")
            out.append(CheckResult(name, False, f"raised {type(exc).__name__}: {exc}"))
    return out
