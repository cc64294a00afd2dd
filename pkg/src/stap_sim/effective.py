"""Zeno-subspace decomposition and the reduced models used as analytic oracles.

Vectors on the full transfer chain use the 7-state ordering
``ψ1 … ψ7`` (index 0 is ψ1).  ``H_re`` is expressed on
``(ψ1, ψ7, φ0, μ1, μ2, μ3, μ4)``, ``H_eff`` on ``(ψ1, ψ7, φ0, μ1, μ2)`` and
``H_m`` on ``(ψ1, φ0, ψ7)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .invariant import PulseProtocol, chi as chi_of

R2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ZenoDecomposition:
    phi0: np.ndarray
    phis: tuple[np.ndarray, ...]   # φ1..φ4
    mu: tuple[np.ndarray, ...]     # μ1..μ4
    energies: tuple[float, ...]    # E0..E4 = 0, λ, −λ, χ, −χ
    chi: float

    @property
    def partition(self) -> dict[str, tuple[np.ndarray, ...]]:
        return {"S0": (self.phi0,), "S1": self.mu[:2], "S2": self.mu[2:]}


def intermediate_eigensystem(v: float, lam: float = 1.0) -> ZenoDecomposition:
    """Closed-form eigenvectors of the cavity/fiber/atom chain ``H_ac + H_cf``."""
    if not (v > 0 and lam > 0):
        raise ValueError("v and lam must be positive")
    c = chi_of(v, lam)
    p = np.eye(7)
    phi0 = v / c * (p[1] - lam / v * p[3] + p[5])
    phi1 = 0.5 * (-p[1] - p[2] + p[4] + p[5])
    phi2 = 0.5 * (-p[1] + p[2] - p[4] + p[5])
    k = c / lam
    phi3 = lam / (2 * c) * (p[1] + k * p[2] + 2 * v / lam * p[3] + k * p[4] + p[5])
    phi4 = lam / (2 * c) * (p[1] - k * p[2] + 2 * v / lam * p[3] - k * p[4] + p[5])
    mu = ((phi1 + phi2) / R2, (phi1 - phi2) / R2, (phi3 + phi4) / R2, (phi3 - phi4) / R2)
    return ZenoDecomposition(phi0=phi0, phis=(phi1, phi2, phi3, phi4), mu=mu,
                             energies=(0.0, lam, -lam, c, -c), chi=c)


def chain_hamiltonian(omega1: float, omega2: float, v: float, lam: float = 1.0) -> np.ndarray:
    """The 7×7 transfer-chain Hamiltonian on ``ψ1 … ψ7``."""
    h = np.zeros((7, 7))
    h[1, 0] = omega1
    h[1, 2] = lam
    h[3, 2] = v
    h[3, 4] = v
    h[5, 4] = lam
    h[5, 6] = omega2
    return h + h.T


def rotated_basis(v: float, lam: float = 1.0) -> np.ndarray:
    """Columns are ψ1, ψ7, φ0, μ1…μ4 written on ``ψ1 … ψ7``."""
    z = intermediate_eigensystem(v, lam)
    p = np.eye(7)
    return np.column_stack([p[0], p[6], z.phi0, *z.mu])


def build_H_re(omega1: float, omega2: float, v: float, lam: float = 1.0) -> np.ndarray:
    c = chi_of(v, lam)
    h = np.zeros((7, 7))
    # rows/cols: 0 ψ1, 1 ψ7, 2 φ0, 3 μ1, 4 μ2, 5 μ3, 6 μ4
    h[2, 0] = v / c * omega1
    h[2, 1] = v / c * omega2
    h[3, 0] = -omega1 / R2
    h[3, 1] = omega2 / R2
    h[5, 0] = lam / (R2 * c) * omega1
    h[5, 1] = lam / (R2 * c) * omega2
    h[3, 4] = lam
    h[5, 6] = c
    return h + h.T


def build_H_eff(omega1: float, omega2: float, v: float, lam: float = 1.0) -> np.ndarray:
    """``H_re`` with the fast S2 block dropped; basis ``(ψ1, ψ7, φ0, μ1, μ2)``."""
    return build_H_re(omega1, omega2, v, lam)[:5, :5].copy()


def build_H_m(omega1: float, omega2: float, v: float, lam: float = 1.0) -> np.ndarray:
    """Main-subsystem Hamiltonian on ``(ψ1, φ0, ψ7)``."""
    c = chi_of(v, lam)
    h = np.zeros((3, 3))
    h[1, 0] = v / c * omega1
    h[1, 2] = v / c * omega2
    return h + h.T


def main_hamiltonian(protocol: PulseProtocol) -> Callable[[float], np.ndarray]:
    omega1, omega2 = protocol.pulses()
    return lambda t: build_H_m(omega1(t), omega2(t), protocol.v, protocol.lam)


def dark_state(omega1: float, omega2: float, lam: float = 1.0) -> np.ndarray:
    """Normalized zero-energy state on ``(ψ1, ψ7, μ2)``."""
    if omega1 == 0 and omega2 == 0:
        raise ValueError("dark state undefined when both drives vanish")
    d = np.array([omega2, -omega1, R2 * omega1 * omega2 / lam])
    return d / np.linalg.norm(d)


def dark_state_chain(omega1: float, omega2: float, v: float, lam: float = 1.0) -> np.ndarray:
    """The dark state written on ``ψ1 … ψ7``."""
    d = dark_state(omega1, omega2, lam)
    mu2 = intermediate_eigensystem(v, lam).mu[1]
    out = d[2] * mu2
    out[0] += d[0]
    out[6] += d[1]
    return out


def ratio_r(omega1: float, omega2: float) -> float:
    """Closed-form |P_φ0 / P_μ1| of the near-zero ``H_eff`` eigenstates (v = λ = 1 units).

    The additive 7 assumes Ω1² + Ω2² = λ²; ``ratio_r_numeric`` is exact for
    any amplitude.  Returns ``inf`` at Ω1 = Ω2.
    """
    a, b = omega1 * omega1, omega2 * omega2
    if a == b:
        return math.inf
    root = math.sqrt((5 * a - 5 * b) ** 2 + 4 * a * b + 12 * (a + b) + 36)
    return abs(math.sqrt(6) * (root + 7) / (12 * (a - b)))


def ratio_r_numeric(omega1: float, omega2: float, v: float = 1.0, lam: float = 1.0) -> float:
    """|⟨φ0|Θ⟩ / ⟨μ1|Θ⟩| for the ±pair of nonzero ``H_eff`` eigenvalues closest to zero.

    The exact zero mode is the dark state, which has no φ0 or μ1 weight,
    and is skipped.  The two members of the pair give the same ratio up to
    round-off; their mean is returned.
    """
    from .numerics import hermitian_eigs

    w, vecs = hermitian_eigs(build_H_eff(omega1, omega2, v, lam))
    scale = max(np.max(np.abs(w)), 1.0)
    nonzero = [k for k in np.argsort(np.abs(w), kind="stable") if abs(w[k]) > 1e-9 * scale]
    ratios = []
    for k in nonzero[:2]:
        m1 = abs(vecs[3, k])
        ratios.append(math.inf if m1 == 0 else abs(vecs[2, k]) / m1)
    return float(np.mean(ratios))


def mu2_population(beta: float, epsilon: float, t_f: float, v: float, lam: float = 1.0) -> float:
    """Dark-state weight on μ2 under STAP drives: 2C²/((λt_f)² + 2C²)."""
    c = chi_of(v, lam) * math.pi / math.tan(epsilon) * math.sin(beta) * math.cos(beta) / (2 * v)
    c_sq = c * c
    return abs(2 * c_sq / ((lam * t_f) ** 2 + 2 * c_sq))
