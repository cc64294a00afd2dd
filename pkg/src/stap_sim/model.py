"""Bases, Hamiltonians, decay channels and target states for the six schemes.

Every scheme is a resonant single-excitation chain

    initial ground --Ω1-- excited(c1) --λ-- photon(c1) --v-- photon(fiber)
        --v-- photon(c2) --λ-- excited(c2) --Ω2-- target ground

possibly with extra spectator or auxiliary states, extended by the all-ground
zero-photon state(s) that a single jump can reach.

Label format is ``"<atoms>;<c1 c2 photons>;<fiber photons>"``.  For ``W`` the
atoms in cavity c2 are written collectively: ``G`` all ground, ``E`` the
symmetric single excitation, ``W`` the symmetric single ``f`` (the W state).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .invariant import PulseProtocol

R2 = math.sqrt(2.0)


class Scheme(str, enum.Enum):
    FPT = "FPT"
    BELL_AUX = "BELL_AUX"
    BELL_TWOATOM = "BELL_TWOATOM"
    GHZ = "GHZ"
    W = "W"
    TRANSFER = "TRANSFER"


DEFAULT_M = {Scheme.GHZ: 3, Scheme.W: 3}


@dataclass(frozen=True)
class SchemeSpec:
    scheme: Scheme
    t_f: float = 10.0
    v: float = 1.0
    lam: float = 1.0
    epsilon: float = math.asin(0.25)
    m: int | None = None
    kappa_c: float = 0.0
    kappa_f: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.m is None:
            object.__setattr__(self, "m", DEFAULT_M.get(self.scheme))
        if not self.t_f > 0:
            raise ValueError(f"t_f must be positive, got {self.t_f!r}")
        if not self.v > 0:
            raise ValueError(f"v must be positive, got {self.v!r}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam!r}")
        if not 0.0 < self.epsilon < math.pi / 2:
            raise ValueError(
                f"epsilon={self.epsilon!r} must lie in (0, pi/2): the STAP pulse amplitude "
                "chi*pi*cot(epsilon)/(2*v*t_f) diverges at epsilon=0")
        for name in ("kappa_c", "kappa_f", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)!r}")
        if self.scheme is Scheme.GHZ and (self.m is None or self.m < 2):
            raise ValueError(f"GHZ needs m >= 2 atoms, got {self.m!r}")
        if self.scheme is Scheme.W and (self.m is None or self.m < 1):
            raise ValueError(f"W needs m >= 1 atoms in cavity c2, got {self.m!r}")

    @property
    def open(self) -> bool:
        return self.kappa_c > 0 or self.kappa_f > 0 or self.gamma > 0

    def with_decay(self, upsilon: float) -> "SchemeSpec":
        """κ_c = κ_f = Γ = Υλ."""
        rate = upsilon * self.lam
        return replace(self, kappa_c=rate, kappa_f=rate, gamma=rate)


def stap_protocol(spec: SchemeSpec) -> PulseProtocol:
    return PulseProtocol(kind="STAP", t_f=spec.t_f, v=spec.v, lam=spec.lam, epsilon=spec.epsilon)


def adiabatic_protocol(spec: SchemeSpec, kind: str = "ADIABATIC_TRIG", **kwargs) -> PulseProtocol:
    return PulseProtocol(kind=kind, t_f=spec.t_f, v=spec.v, lam=spec.lam, **kwargs)


@dataclass(frozen=True)
class Basis:
    labels: tuple[str, ...]
    initial: tuple[int, ...]
    target: tuple[int, ...]
    intermediate: tuple[int, ...]
    absorbing: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("basis labels must be unique")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @property
    def dynamical(self) -> tuple[int, ...]:
        """Indices outside the absorbing set."""
        skip = set(self.absorbing)
        return tuple(i for i in range(self.dim) if i not in skip)


@dataclass(frozen=True)
class DecaySet:
    ops: tuple[np.ndarray, ...]
    tags: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.ops)

    def effective(self) -> "DecaySet":
        """Only the channels with a nonzero rate."""
        keep = [k for k, op in enumerate(self.ops) if np.any(op)]
        return DecaySet(tuple(self.ops[k] for k in keep), tuple(self.tags[k] for k in keep))


@dataclass(frozen=True)
class _Layout:
    labels: list[str]
    static: list[tuple[int, int, float]]   # (i, j, coupling)
    cavity_fiber: list[tuple[int, int]]    # (i, j) couplings with strength v
    drive1: list[tuple[int, int, float]]   # (i, j, coefficient of Ω1)
    drive2: list[tuple[int, int, float]]
    jumps: list[tuple[str, str, int, int]]  # (tag, rate name, source, destination)
    initial: dict[int, complex]
    target: dict[int, complex]
    absorbing: list[int]
    chain: np.ndarray = field(repr=False)  # columns: ψ1..ψ7 images in this basis


def _atomic_jumps(tag: str, excited: int, to_f: int, ground: int):
    return [(f"{tag}->f", "gamma_half", excited, to_f), (f"{tag}->g", "gamma_half", excited, ground)]


def _chain_matrix(dim: int, columns: list[dict[int, float]]) -> np.ndarray:
    out = np.zeros((dim, 7))
    for col, entries in enumerate(columns):
        for i, val in entries.items():
            out[i, col] = val
    return out


def _fpt_like(labels: list[str], lam: float, extra=(), initial=None, target=None) -> _Layout:
    # 0..6 chain, 7 absorbing ground, then extras
    labels = labels[:8] + list(extra)
    return _Layout(
        labels=labels,
        static=[(1, 2, lam), (5, 4, lam)],
        cavity_fiber=[(3, 2), (3, 4)],
        drive1=[(1, 0, 1.0)],
        drive2=[(5, 6, 1.0)],
        jumps=[("cavity1", "kappa_c", 2, 7), ("cavity2", "kappa_c", 4, 7),
               ("fiber", "kappa_f", 3, 7)]
        + _atomic_jumps("atom1", 1, 0, 7) + _atomic_jumps("atom2", 5, 6, 7),
        initial=initial or {0: 1.0},
        target=target or {6: 1.0},
        absorbing=[7],
        chain=_chain_matrix(len(labels), [{k: 1.0} for k in range(7)]),
    )


def _layout(spec: SchemeSpec) -> _Layout:
    lam = spec.lam
    s = spec.scheme
    if s is Scheme.FPT:
        return _fpt_like(["f g;00;0", "e g;00;0", "g g;10;0", "g g;00;1", "g g;01;0",
                          "g e;00;0", "g f;00;0", "g g;00;0"], lam)
    if s in (Scheme.BELL_AUX, Scheme.GHZ):
        if s is Scheme.BELL_AUX:
            mid, aux = "", "a g"
        else:
            mid = " a" * (spec.m - 2)
            aux = "a" + " g" * (spec.m - 1)

        def lab(first: str, last: str, rest: str) -> str:
            return f"{first}{mid} {last};{rest}"

        labels = [lab("f", "g", "00;0"), lab("e", "g", "00;0"), lab("g", "g", "10;0"),
                  lab("g", "g", "00;1"), lab("g", "g", "01;0"), lab("g", "e", "00;0"),
                  lab("g", "f", "00;0"), lab("g", "g", "00;0")]
        return _fpt_like(labels, lam, extra=[f"{aux};00;0"],
                         initial={0: 1 / R2, 8: 1 / R2}, target={6: -1 / R2, 8: 1 / R2})
    if s is Scheme.W:
        labels = ["f G;00;0", "e G;00;0", "g G;10;0", "g G;00;1", "g G;01;0",
                  "g E;00;0", "g W;00;0", "g G;00;0"]
        # λ_p = √M λ_s = λ: the collective coupling equals λ for every M
        return _fpt_like(labels, lam)
    if s is Scheme.BELL_TWOATOM:
        labels = ["f g g;00;0", "e g g;00;0", "g g g;10;0", "g g g;00;1", "g g g;01;0",
                  "g e g;00;0", "g f g;00;0", "g g e;00;0", "g g f;00;0", "g g g;00;0"]
        lam_c2 = lam / R2  # λ1 = √2 λ2 = √2 λ3 = λ
        return _Layout(
            labels=labels,
            static=[(1, 2, lam), (5, 4, lam_c2), (7, 4, lam_c2)],
            cavity_fiber=[(3, 2), (3, 4)],
            drive1=[(1, 0, 1.0)],
            drive2=[(5, 6, 1.0), (7, 8, 1.0)],
            jumps=[("cavity1", "kappa_c", 2, 9), ("cavity2", "kappa_c", 4, 9),
                   ("fiber", "kappa_f", 3, 9)]
            + _atomic_jumps("atom1", 1, 0, 9) + _atomic_jumps("atom2", 5, 6, 9)
            + _atomic_jumps("atom3", 7, 8, 9),
            initial={0: 1.0},
            target={6: 1 / R2, 8: 1 / R2},
            absorbing=[9],
            chain=_chain_matrix(10, [{0: 1}, {1: 1}, {2: 1}, {3: 1}, {4: 1},
                                     {5: 1 / R2, 7: 1 / R2}, {6: 1 / R2, 8: 1 / R2}]),
        )
    if s is Scheme.TRANSFER:
        labels = ["fg gg;00;0", "eg gg;00;0", "gg gg;10;0", "ge gg;00;0", "gf gg;00;0",
                  "gg gg;00;1", "gg eg;00;0", "gg fg;00;0", "gg gg;01;0", "gg ge;00;0",
                  "gg gf;00;0", "gg gg;00;0"]
        lk = lam / R2
        return _Layout(
            labels=labels,
            static=[(1, 2, lk), (3, 2, lk), (6, 8, lk), (9, 8, lk)],
            cavity_fiber=[(5, 2), (5, 8)],
            drive1=[(1, 0, 1.0), (3, 4, 1.0)],
            drive2=[(6, 7, 1.0), (9, 10, 1.0)],
            jumps=[("cavity1", "kappa_c", 2, 11), ("cavity2", "kappa_c", 8, 11),
                   ("fiber", "kappa_f", 5, 11)]
            + _atomic_jumps("atom1", 1, 0, 11) + _atomic_jumps("atom2", 3, 4, 11)
            + _atomic_jumps("atom3", 6, 7, 11) + _atomic_jumps("atom4", 9, 10, 11),
            initial={0: 1 / R2, 4: 1 / R2},
            target={7: 1 / R2, 10: 1 / R2},
            absorbing=[11],
            chain=_chain_matrix(12, [{0: 1 / R2, 4: 1 / R2}, {1: 1 / R2, 3: 1 / R2}, {2: 1},
                                     {5: 1}, {8: 1}, {6: 1 / R2, 9: 1 / R2},
                                     {7: 1 / R2, 10: 1 / R2}]),
        )
    raise ValueError(f"unknown scheme {s!r}")


def build_basis(spec: SchemeSpec) -> Basis:
    lay = _layout(spec)
    support = lambda vec: tuple(sorted(vec))  # noqa: E731
    excluded = set(lay.initial) | set(lay.target) | set(lay.absorbing)
    # auxiliary ground states (annihilated by H, part of initial/target) are
    # neither intermediate nor absorbing
    touched = {i for i, j, _ in lay.static} | {j for i, j, _ in lay.static}
    touched |= {i for i, j in lay.cavity_fiber} | {j for i, j in lay.cavity_fiber}
    touched |= {i for i, j, _ in lay.drive1 + lay.drive2}
    intermediate = tuple(i for i in range(len(lay.labels)) if i not in excluded and i in touched)
    return Basis(labels=tuple(lay.labels), initial=support(lay.initial), target=support(lay.target),
                 intermediate=intermediate, absorbing=tuple(lay.absorbing))


def hamiltonian_parts(spec: SchemeSpec, *, hcf_sign: float = 1.0
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(H0, D1, D2)`` with H(t) = H0 + Ω1(t) D1 + Ω2(t) D2.

    ``hcf_sign`` flips the cavity-fiber coupling on the c2 side; it exists
    only so the verification suite can check that it detects a broken model.
    """
    lay = _layout(spec)
    dim = len(lay.labels)
    h0 = np.zeros((dim, dim))
    for i, j, g in lay.static:
        h0[i, j] += g
    for k, (i, j) in enumerate(lay.cavity_fiber):
        h0[i, j] += spec.v * (hcf_sign if k == 1 else 1.0)
    d1 = np.zeros((dim, dim))
    for i, j, c in lay.drive1:
        d1[i, j] += c
    d2 = np.zeros((dim, dim))
    for i, j, c in lay.drive2:
        d2[i, j] += c
    return h0 + h0.T, d1 + d1.T, d2 + d2.T


def hamiltonian_fn(spec: SchemeSpec, protocol: PulseProtocol, **kwargs
                   ) -> Callable[[float], np.ndarray]:
    h0, d1, d2 = hamiltonian_parts(spec, **kwargs)
    omega1, omega2 = protocol.pulses()
    h0 = h0.astype(complex)

    def h(t: float) -> np.ndarray:
        return h0 + omega1(t) * d1 + omega2(t) * d2

    return h


def build_hamiltonian(spec: SchemeSpec, protocol: PulseProtocol, t: float) -> np.ndarray:
    if not -1e-9 * spec.t_f <= t <= spec.t_f * (1 + 1e-9):
        raise ValueError(f"t={t!r} outside [0, t_f={spec.t_f}]")
    return hamiltonian_fn(spec, protocol)(t)


def build_lindblads(spec: SchemeSpec) -> DecaySet:
    """All jump channels, with amplitudes √rate (Γ/2 for each atomic branch)."""
    lay = _layout(spec)
    dim = len(lay.labels)
    rates = {"kappa_c": spec.kappa_c, "kappa_f": spec.kappa_f, "gamma_half": spec.gamma / 2}
    ops, tags = [], []
    for tag, rate, src, dst in lay.jumps:
        op = np.zeros((dim, dim), dtype=complex)
        op[dst, src] = math.sqrt(rates[rate])
        ops.append(op)
        tags.append(tag)
    return DecaySet(tuple(ops), tuple(tags))


def _vector(dim: int, entries: dict[int, complex]) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    for i, val in entries.items():
        vec[i] = val
    return vec


def initial_state(spec: SchemeSpec) -> np.ndarray:
    lay = _layout(spec)
    return _vector(len(lay.labels), lay.initial)


def target_state(spec: SchemeSpec) -> np.ndarray:
    lay = _layout(spec)
    return _vector(len(lay.labels), lay.target)


def chain_embedding(spec: SchemeSpec) -> np.ndarray:
    """Isometry (dim × 7) sending the transfer-chain states ψ1…ψ7 into this basis.

    ``H(t) @ V == V @ H_chain(t)`` holds exactly, and for the schemes with
    an auxiliary branch the initial state is (V e1 + aux)/√2.
    """
    return _layout(spec).chain.astype(complex)


def w_to_twoatom_map(spec_w: SchemeSpec) -> np.ndarray:
    """Isometry from the collective W(M=2) basis into the BELL_TWOATOM basis."""
    if spec_w.scheme is not Scheme.W or spec_w.m != 2:
        raise ValueError("needs a W spec with m=2")
    twoatom = replace(spec_w, scheme=Scheme.BELL_TWOATOM, m=None)
    emb = chain_embedding(twoatom)
    out = np.zeros((10, 8), dtype=complex)
    out[:, :7] = emb
    out[9, 7] = 1.0
    return out


def label_map(source: SchemeSpec, dest: SchemeSpec) -> dict[str, str]:
    """Label correspondence for index-aligned equivalent schemes (GHZ ↔ BELL_AUX, W(M) ↔ W(M'))."""
    a, b = build_basis(source), build_basis(dest)
    if a.dim != b.dim:
        raise ValueError("label_map needs bases of equal dimension")
    return dict(zip(a.labels, b.labels))
