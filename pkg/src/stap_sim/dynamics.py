"""Scheme-level runs: trajectories, derived populations and fidelities."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import effective, model, numerics
from .invariant import PulseKind, PulseProtocol
from .model import Scheme, SchemeSpec

log = logging.getLogger(__name__)

DEFAULT_STEPS = 2000
DEFAULT_SAMPLES = 1001
NORM_TOL = 1e-6
TRACE_TOL = 1e-6
POSITIVITY_TOL = 1e-6


class PropagationError(RuntimeError):
    """Norm or trace audit failed during a run."""


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    populations: dict[str, np.ndarray]
    derived_populations: dict[str, np.ndarray]
    fidelity: np.ndarray
    trace: np.ndarray
    min_eigenvalue: np.ndarray | None = None

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelity[-1])


@dataclass(frozen=True)
class SimResult:
    spec: SchemeSpec
    protocol: PulseProtocol
    trajectory: Trajectory
    open_system: bool
    max_intermediate: dict[str, float]
    final_state: np.ndarray

    @property
    def final_fidelity(self) -> float:
        return self.trajectory.final_fidelity


def fidelity(state: np.ndarray, target: np.ndarray) -> float:
    """|⟨t|ψ⟩|² for a pure state, |⟨t|ρ|t⟩| for a density matrix."""
    state = np.asarray(state)
    target = np.asarray(target)
    if state.shape[0] != target.shape[0]:
        raise ValueError(f"dimension mismatch: state {state.shape}, target {target.shape}")
    if state.ndim == 1:
        return float(abs(np.vdot(target, state)) ** 2)
    return float(abs(np.vdot(target, state @ target)))


def derived_states(spec: SchemeSpec, protocol: PulseProtocol):
    """Named analytic states on the scheme basis; ``dark`` is returned as a function of t."""
    emb = model.chain_embedding(spec)
    z = effective.intermediate_eigensystem(spec.v, spec.lam)
    fixed = {"phi0": emb @ z.phi0}
    for k, mu in enumerate(z.mu, start=1):
        fixed[f"mu{k}"] = emb @ mu
    omega1, omega2 = protocol.pulses()

    def dark(t: float) -> np.ndarray | None:
        o1, o2 = omega1(t), omega2(t)
        if o1 == 0 and o2 == 0:
            return None
        return emb @ effective.dark_state_chain(o1, o2, spec.v, spec.lam)

    return fixed, dark


def _check_protocol(spec: SchemeSpec, protocol: PulseProtocol) -> None:
    if not np.isclose(protocol.t_f, spec.t_f, rtol=1e-12, atol=0):
        raise ValueError(f"protocol t_f={protocol.t_f} differs from spec t_f={spec.t_f}")
    if not (np.isclose(protocol.v, spec.v) and np.isclose(protocol.lam, spec.lam)):
        raise ValueError("protocol (v, lam) differ from spec")


def run(spec: SchemeSpec, protocol: PulseProtocol, open_system: bool = False,
        steps: int = DEFAULT_STEPS, samples: int = DEFAULT_SAMPLES,
        hcf_sign: float = 1.0) -> SimResult:
    """Propagate one scheme and extract observables on ``samples`` uniform times.

    The closed branch integrates the Schrödinger equation on the non-absorbing
    states; the open branch integrates the Lindblad equation on the extended
    basis.  With every decay rate zero the open branch reduces to the closed one.
    """
    _check_protocol(spec, protocol)
    if steps <= 0:
        raise ValueError(f"steps must be positive, got {steps}")
    if samples < 2:
        raise ValueError("need at least two samples")
    basis = model.build_basis(spec)
    times = np.linspace(0.0, spec.t_f, samples)
    step = spec.t_f / steps
    h_full = model.hamiltonian_fn(spec, protocol, hcf_sign=hcf_sign)
    psi0 = model.initial_state(spec)
    target = model.target_state(spec)
    decays = model.build_lindblads(spec).effective()
    min_eig = None

    if open_system and len(decays):
        rho0 = np.outer(psi0, psi0.conj())
        rhos = numerics.propagate_density(h_full, decays.ops, rho0, times, step)
        diag = np.real(np.einsum("kii->ki", rhos))
        trace = diag.sum(axis=1)
        min_eig = np.array([np.linalg.eigvalsh(r)[0] for r in rhos])
        if np.max(np.abs(trace - 1.0)) > TRACE_TOL:
            raise PropagationError(f"trace drift {np.max(np.abs(trace - 1.0)):.3e} exceeds {TRACE_TOL}")
        if min_eig.min() < -POSITIVITY_TOL:
            raise PropagationError(f"negative eigenvalue {min_eig.min():.3e}")

        def project(vec: np.ndarray) -> np.ndarray:
            return np.real(np.einsum("i,kij,j->k", vec.conj(), rhos, vec))

        final_state = rhos[-1]
        fid = np.abs(np.einsum("i,kij,j->k", target.conj(), rhos, target))
    else:
        keep = list(basis.dynamical)
        h_block = lambda t: h_full(t)[np.ix_(keep, keep)]  # noqa: E731
        block = numerics.propagate_state(h_block, psi0[keep], times, step)
        psis = np.zeros((samples, basis.dim), dtype=complex)
        psis[:, keep] = block
        diag = np.abs(psis) ** 2
        trace = diag.sum(axis=1)
        drift = np.max(np.abs(trace - 1.0))
        if drift > NORM_TOL:
            raise PropagationError(f"norm drift {drift:.3e} exceeds {NORM_TOL}")

        def project(vec: np.ndarray) -> np.ndarray:
            return np.abs(psis @ vec.conj()) ** 2

        final_state = psis[-1]
        fid = np.abs(psis @ target.conj()) ** 2

    populations = {label: diag[:, i].copy() for i, label in enumerate(basis.labels)}
    fixed, dark = derived_states(spec, protocol)
    derived = {name: project(vec) for name, vec in fixed.items()}
    dark_pop = np.empty(samples)
    for k, t in enumerate(times):
        d = dark(float(t))
        if d is None:
            dark_pop[k] = np.nan
        elif min_eig is not None:
            dark_pop[k] = float(np.real(np.vdot(d, rhos[k] @ d)))
        else:
            dark_pop[k] = float(abs(np.vdot(d, psis[k])) ** 2)
    derived["dark"] = dark_pop
    if spec.scheme is Scheme.W:
        # each c2 atom carries an equal share of the collective W population
        w_pop = populations["g W;00;0"] / spec.m
        for n in range(1, spec.m + 1):
            derived[f"w{n}"] = w_pop.copy()

    traj = Trajectory(times=times, populations=populations, derived_populations=derived,
                      fidelity=np.asarray(fid, dtype=float), trace=trace, min_eigenvalue=min_eig)
    max_intermediate = {basis.labels[i]: float(populations[basis.labels[i]].max())
                        for i in basis.intermediate}
    max_intermediate.update({name: float(np.nanmax(series)) for name, series in derived.items()
                             if name in ("phi0", "mu1", "mu2", "mu3", "mu4")})
    return SimResult(spec=spec, protocol=protocol, trajectory=traj,
                     open_system=bool(open_system and len(decays)),
                     max_intermediate=max_intermediate, final_state=final_state)


def protocol_for(spec: SchemeSpec, template: PulseProtocol) -> PulseProtocol:
    """Re-target a protocol template at a spec (t_f, v, λ and, for STAP, ε)."""
    changes = dict(t_f=spec.t_f, v=spec.v, lam=spec.lam)
    if template.kind is PulseKind.STAP:
        changes["epsilon"] = spec.epsilon
    return replace(template, **changes)


def _final_fidelity(args) -> float:
    spec, protocol, open_system, steps = args
    return run(spec, protocol, open_system=open_system, steps=steps).final_fidelity


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("STAP_SIM_WORKERS", "1")))
    except ValueError:
        return 1


def map_cells(func, cells: Sequence, workers: int | None = None) -> list:
    """Evaluate cells in order; parallel workers never change the ordering."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(cells) <= 1:
        return [func(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, cells, chunksize=max(1, len(cells) // (4 * workers))))


def compare_protocols(spec: SchemeSpec, protocols: Sequence[PulseProtocol],
                      t_f_grid: Iterable[float], open_system: bool = False,
                      steps: int = DEFAULT_STEPS, workers: int | None = None
                      ) -> list[tuple[int, float, float]]:
    """Final fidelity for every (protocol index, t_f) cell, protocol-major."""
    grid = [float(t) for t in t_f_grid]
    if not grid:
        raise ValueError("t_f grid is empty")
    cells, keys = [], []
    for k, template in enumerate(protocols):
        for tf in grid:
            s = replace(spec, t_f=tf)
            cells.append((s, protocol_for(s, template), open_system, steps))
            keys.append((k, tf))
    values = map_cells(_final_fidelity, cells, workers)
    return [(k, tf, val) for (k, tf), val in zip(keys, values)]
