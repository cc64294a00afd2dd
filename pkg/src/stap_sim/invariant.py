"""Invariant-based pulse engineering for the three-state main subsystem.

All three-state objects live on the ordered basis ``(ψ1, φ0, ψ7)``: the
initial ground state, the dark intermediate state and the target ground
state.  Frequencies are in units of λ and times in units of 1/λ.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson

Pulse = Callable[[float], float]


class PulseKind(str, enum.Enum):
    STAP = "STAP"
    ADIABATIC_TRIG = "ADIABATIC_TRIG"
    ADIABATIC_EXP = "ADIABATIC_EXP"


def chi(v: float, lam: float = 1.0) -> float:
    """Frequency of the far-detuned intermediate block, √(2v² + λ²)."""
    return math.sqrt(2.0 * v * v + lam * lam)


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon < math.pi / 2:
        raise ValueError(
            f"epsilon={epsilon!r} must lie in (0, pi/2): the STAP pulse amplitude "
            "chi*pi*cot(epsilon)/(2*v*t_f) diverges at epsilon=0")


def stap_amplitude(epsilon: float, t_f: float, v: float, lam: float = 1.0) -> float:
    _check_epsilon(epsilon)
    if not t_f > 0:
        raise ValueError(f"t_f must be positive, got {t_f!r}")
    if not v > 0:
        raise ValueError(f"v must be positive, got {v!r}")
    return chi(v, lam) * math.pi / math.tan(epsilon) / (2.0 * v * t_f)


def stap_pulses(epsilon: float, t_f: float, v: float, lam: float = 1.0) -> tuple[Pulse, Pulse]:
    """Ω1(t) = Ω0 sin(πt/2t_f), Ω2(t) = Ω0 cos(πt/2t_f)."""
    amp = stap_amplitude(epsilon, t_f, v, lam)
    rate = math.pi / (2.0 * t_f)
    return (lambda t: amp * math.sin(rate * t)), (lambda t: amp * math.cos(rate * t))


def epsilon_for_order(n: int) -> float:
    """ε = arcsin(1/4N), for which the LR phase π/(2 sin ε) equals 2Nπ."""
    if int(n) != n or n <= 0:
        raise ValueError(f"order must be a positive integer, got {n!r}")
    return math.asin(1.0 / (4 * int(n)))


@dataclass(frozen=True)
class PulseProtocol:
    """A closed-form pair of drives.

    ``epsilon`` is only used by STAP; ``amp``, ``exponent`` and
    ``amp_ratio`` only by the adiabatic kinds.
    """

    kind: PulseKind
    t_f: float
    v: float = 1.0
    lam: float = 1.0
    epsilon: float | None = None
    amp: float = 1.0
    exponent: float = 1.2
    amp_ratio: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", PulseKind(self.kind))
        if not self.t_f > 0:
            raise ValueError(f"t_f must be positive, got {self.t_f!r}")
        if self.kind is PulseKind.STAP:
            if self.epsilon is None:
                raise ValueError("STAP protocol requires epsilon")
            stap_amplitude(self.epsilon, self.t_f, self.v, self.lam)
        if self.kind is PulseKind.ADIABATIC_EXP and self.exponent < 0:
            raise ValueError(f"exponent must be nonnegative, got {self.exponent!r}")

    @property
    def omega0(self) -> float:
        """Peak drive amplitude; for STAP recomputed from (ε, t_f, v, λ)."""
        if self.kind is PulseKind.STAP:
            return stap_amplitude(self.epsilon, self.t_f, self.v, self.lam)
        return self.amp * self.lam

    def pulses(self) -> tuple[Pulse, Pulse]:
        if self.kind is PulseKind.STAP:
            return stap_pulses(self.epsilon, self.t_f, self.v, self.lam)
        return adiabatic_pulses(self)


def adiabatic_pulses(protocol: PulseProtocol) -> tuple[Pulse, Pulse]:
    """Reference drives with β = πt/2t_f.

    ADIABATIC_TRIG: Ω1 = A sin β, Ω2 = A cos β.
    ADIABATIC_EXP:  Ω1 = r A (sin β)^p, Ω2 = A (cos β)^p.
    """
    kind = PulseKind(protocol.kind)
    if kind is PulseKind.STAP:
        raise ValueError("adiabatic_pulses needs an adiabatic protocol")
    if protocol.exponent < 0:
        raise ValueError(f"exponent must be nonnegative, got {protocol.exponent!r}")
    amp = protocol.amp * protocol.lam
    rate = math.pi / (2.0 * protocol.t_f)
    if kind is PulseKind.ADIABATIC_TRIG:
        return (lambda t: amp * math.sin(rate * t)), (lambda t: amp * math.cos(rate * t))
    p = protocol.exponent
    ratio = protocol.amp_ratio

    # clamp: cos(π/2) is ~6e-17 and a tiny negative base would go complex
    def omega1(t: float) -> float:
        return ratio * amp * max(math.sin(rate * t), 0.0) ** p

    def omega2(t: float) -> float:
        return amp * max(math.cos(rate * t), 0.0) ** p

    return omega1, omega2


@dataclass(frozen=True)
class InvariantParams:
    """Auxiliary angles γ(t), β(t) of the invariant and their time derivatives."""

    gamma: Callable[[float], float]
    beta: Callable[[float], float]
    gamma_dot: Callable[[float], float]
    beta_dot: Callable[[float], float]
    chi0: float = 1.0

    @classmethod
    def linear(cls, epsilon: float, t_f: float, chi0: float = 1.0) -> "InvariantParams":
        """Constant γ = ε and linear β = πt/2t_f."""
        rate = math.pi / (2.0 * t_f)
        return cls(gamma=lambda t: epsilon, beta=lambda t: rate * t,
                   gamma_dot=lambda t: 0.0, beta_dot=lambda t: rate, chi0=chi0)


def engineered_pulses(params: InvariantParams, v: float, lam: float = 1.0) -> tuple[Pulse, Pulse]:
    """Drives that make ``I(t)`` an exact invariant of the main-subsystem Hamiltonian.

    Ω1 = (χ/v)(β̇ cot γ sin β + γ̇ cos β), Ω2 = (χ/v)(β̇ cot γ cos β − γ̇ sin β).
    """
    scale = chi(v, lam) / v

    def omega1(t: float) -> float:
        g, b = params.gamma(t), params.beta(t)
        return scale * (params.beta_dot(t) / math.tan(g) * math.sin(b)
                        + params.gamma_dot(t) * math.cos(b))

    def omega2(t: float) -> float:
        g, b = params.gamma(t), params.beta(t)
        return scale * (params.beta_dot(t) / math.tan(g) * math.cos(b)
                        - params.gamma_dot(t) * math.sin(b))

    return omega1, omega2


def invariant_matrix(gamma: float, beta: float, chi0: float = 1.0) -> np.ndarray:
    i_op = np.zeros((3, 3), dtype=complex)
    i_op[1, 0] = math.cos(gamma) * math.sin(beta)
    i_op[1, 2] = math.cos(gamma) * math.cos(beta)
    i_op[2, 0] = 1j * math.sin(gamma)
    return chi0 * (i_op + i_op.conj().T)


def invariant_operator(params: InvariantParams, t: float) -> np.ndarray:
    return invariant_matrix(params.gamma(t), params.beta(t), params.chi0)


MODES = (0, 1, -1)


def invariant_eigenstates(gamma: float, beta: float) -> dict[int, np.ndarray]:
    """Eigenstates of ``I`` keyed by the sign of their eigenvalue (0, +1, −1)."""
    sg, cg = math.sin(gamma), math.cos(gamma)
    sb, cb = math.sin(beta), math.cos(beta)
    theta0 = np.array([cg * cb, -1j * sg, -cg * sb])
    r2 = math.sqrt(2.0)
    plus = np.array([sg * cb + 1j * sb, 1j * cg, -(sg * sb - 1j * cb)]) / r2
    minus = np.array([sg * cb - 1j * sb, 1j * cg, -(sg * sb + 1j * cb)]) / r2
    return {0: theta0, 1: plus, -1: minus}


def _eigenstate_derivatives(gamma: float, beta: float) -> tuple[dict, dict]:
    """Partial derivatives of the eigenstates with respect to γ and β."""
    sg, cg = math.sin(gamma), math.cos(gamma)
    sb, cb = math.sin(beta), math.cos(beta)
    r2 = math.sqrt(2.0)
    d_gamma = {
        0: np.array([-sg * cb, -1j * cg, sg * sb]),
        1: np.array([cg * cb, -1j * sg, -cg * sb]) / r2,
        -1: np.array([cg * cb, -1j * sg, -cg * sb]) / r2,
    }
    d_beta = {
        0: np.array([-cg * sb, 0.0, -cg * cb]),
        1: np.array([-sg * sb + 1j * cb, 0.0, -(sg * cb + 1j * sb)]) / r2,
        -1: np.array([-sg * sb - 1j * cb, 0.0, -(sg * cb - 1j * sb)]) / r2,
    }
    return d_gamma, d_beta


def lr_phase_rate(mode: int, t: float, params: InvariantParams,
                  hamiltonian: Callable[[float], np.ndarray]) -> float:
    """dα_n/dt = ⟨θ_n| i∂_t − H(t) |θ_n⟩."""
    g, b = params.gamma(t), params.beta(t)
    theta = invariant_eigenstates(g, b)[mode]
    d_gamma, d_beta = _eigenstate_derivatives(g, b)
    d_theta = params.gamma_dot(t) * d_gamma[mode] + params.beta_dot(t) * d_beta[mode]
    value = np.vdot(theta, 1j * d_theta - hamiltonian(t) @ theta)
    return float(value.real)


def lr_phase(mode: int, t: float, params: InvariantParams,
             hamiltonian: Callable[[float], np.ndarray], num: int = 2001) -> float:
    """LR phase α_n(t) by composite Simpson quadrature on ``num`` points over [0, t].

    Sign convention: mode +1 is the eigenstate with eigenvalue +χ0.  For the
    constant-γ parametrization α₊(t_f) = −π/(2 sin ε) and α₋(t_f) = +π/(2 sin ε).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if t == 0:
        return 0.0
    ts = np.linspace(0.0, t, num)
    rates = np.array([lr_phase_rate(mode, float(s), params, hamiltonian) for s in ts])
    return float(simpson(rates, x=ts))


def lr_state(t: float, coefficients: dict[int, complex], phases: dict[int, float],
             params: InvariantParams) -> np.ndarray:
    """Σ_n C_n e^{iα_n} θ_n(t)."""
    states = invariant_eigenstates(params.gamma(t), params.beta(t))
    return sum(coefficients[n] * np.exp(1j * phases[n]) * states[n] for n in MODES)


def analytic_final_state(epsilon: float, alpha: float | None = None) -> np.ndarray:
    """Exact final state at t = t_f on ``(ψ1, φ0, ψ7)`` starting from ψ1.

    Components: (sin ε sin α, −i sin ε cos ε (1 − cos α), −cos²ε − sin²ε cos α)
    with α = π/(2 sin ε).  The first entry is real: it comes from
    (sin ε/2)(i e^{−iα} − i e^{iα}) in the invariant expansion.
    """
    if alpha is None:
        alpha = math.pi / (2.0 * math.sin(epsilon))
    se, ce = math.sin(epsilon), math.cos(epsilon)
    return np.array([
        se * math.sin(alpha),
        -1j * se * ce + 1j * se * ce * math.cos(alpha),
        -ce * ce - se * se * math.cos(alpha),
    ], dtype=complex)


def pulse_table(protocol: PulseProtocol, samples: int = 1001) -> np.ndarray:
    """Rows of (t, Ω1/λ, Ω2/λ) on a uniform grid over [0, t_f]."""
    omega1, omega2 = protocol.pulses()
    ts = np.linspace(0.0, protocol.t_f, samples)
    return np.array([[t, omega1(t) / protocol.lam, omega2(t) / protocol.lam] for t in ts])
