"""Dense complex linear algebra and fixed-step integrators.

Operators, state vectors and density matrices are plain ``numpy`` arrays
(complex128).  Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
JACOBI_THRESHOLD = 1e-14
JACOBI_SWEEPS = 100

HamiltonianFn = Callable[[float], np.ndarray]


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi sweep budget is exhausted."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _square(a: np.ndarray, name: str = "operator") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and matrix_norm_max(a - a.conj().T) <= tol


def matrix_norm_max(a: np.ndarray) -> float:
    """Largest absolute entry."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = _square(a, "A")
    b = _square(b, "B")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def hermitian_eigs(a: np.ndarray, threshold: float = JACOBI_THRESHOLD,
                   max_sweeps: int = JACOBI_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each complex off-diagonal element is first rotated to a real one by a
    diagonal phase, then annihilated with an ordinary real Jacobi rotation.

    Returns ``(w, V)`` with ascending real eigenvalues ``w`` and the
    eigenvectors as the columns of the unitary ``V``.
    """
    a = _square(a)
    if not is_hermitian(a, tol=max(HERMITIAN_TOL, HERMITIAN_TOL * matrix_norm_max(a))):
        raise ValueError("hermitian_eigs requires a Hermitian matrix")
    n = a.shape[0]
    work = 0.5 * (a + a.conj().T)
    vecs = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)

    def off_norm(m: np.ndarray) -> float:
        # summed directly: total minus diagonal cancels catastrophically near convergence
        return float(np.linalg.norm(m[~np.eye(n, dtype=bool)]))

    converged = off_norm(work) <= threshold * scale
    sweeps = 0
    while not converged and sweeps < max_sweeps:
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app = work[p, p].real
                aqq = work[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                work[:, idx] = work[:, idx] @ rot
                work[idx, :] = rot.conj().T @ work[idx, :]
                vecs[:, idx] = vecs[:, idx] @ rot
        converged = off_norm(work) <= threshold * scale

    w = np.real(np.diag(work))
    order = np.argsort(w, kind="stable")
    w = w[order]
    vecs = vecs[:, order]
    residual = float(np.max(np.linalg.norm(a @ vecs - vecs * w, axis=0))) if n else 0.0
    if not converged:
        raise ConvergenceError(
            f"Jacobi did not converge in {max_sweeps} sweeps (residual {residual:.3e})", residual)
    return w, vecs


def _substeps(t0: float, t1: float, step: float) -> int:
    return max(1, math.ceil((t1 - t0) / step - 1e-9))


def _check_grid(t_grid: Sequence[float], step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("t_grid must be a nonempty 1-d sequence")
    if np.any(np.diff(grid) < 0):
        raise ValueError("t_grid must be non-decreasing")
    return grid


def _rk4(f: Callable[[float, np.ndarray], np.ndarray], y: np.ndarray, t: float,
         dt: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def propagate_state(hamiltonian: HamiltonianFn, psi0: np.ndarray, t_grid: Sequence[float],
                    step: float) -> np.ndarray:
    """Integrate ``i dψ/dt = H(t) ψ`` with classical RK4.

    Each grid interval is split into equal substeps no longer than ``step``.
    Returns an array of shape ``(len(t_grid), dim)``.
    """
    grid = _check_grid(t_grid, step)
    psi = np.array(psi0, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("psi0 must be a vector")
    h0 = np.asarray(hamiltonian(float(grid[0])))
    if h0.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: H is {h0.shape}, psi0 has {psi.size} entries")

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return -1j * (hamiltonian(t) @ y)

    out = np.empty((grid.size, psi.size), dtype=complex)
    out[0] = psi
    for k in range(1, grid.size):
        t0, t1 = float(grid[k - 1]), float(grid[k])
        n = _substeps(t0, t1, step)
        dt = (t1 - t0) / n
        for j in range(n):
            psi = _rk4(rhs, psi, t0 + j * dt, dt)
        out[k] = psi
    return out


def lindblad_rhs(hamiltonian: np.ndarray, lindblads: Sequence[np.ndarray],
                 rho: np.ndarray) -> np.ndarray:
    """ρ̇ = i[ρ, H] + Σ_k (L ρ L† − ½{L†L, ρ})."""
    out = 1j * (rho @ hamiltonian - hamiltonian @ rho)
    for op in lindblads:
        ldl = op.conj().T @ op
        out += op @ rho @ op.conj().T - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def propagate_density(hamiltonian: HamiltonianFn, lindblads: Sequence[np.ndarray],
                      rho0: np.ndarray, t_grid: Sequence[float], step: float) -> np.ndarray:
    """RK4 on the full Lindblad equation; ρ is re-symmetrized after every step.

    Returns an array of shape ``(len(t_grid), dim, dim)``.
    """
    grid = _check_grid(t_grid, step)
    rho = _square(rho0, "rho0").copy()
    dim = rho.shape[0]
    ops = [_square(op, "Lindblad operator") for op in lindblads]
    for op in ops:
        if op.shape != (dim, dim):
            raise ValueError(f"Lindblad operator shape {op.shape} does not match rho {rho.shape}")
    if np.asarray(hamiltonian(float(grid[0]))).shape != (dim, dim):
        raise ValueError("dimension mismatch between H and rho0")

    # dissipator as a fixed superoperator acting on row-major vec(ρ)
    eye = np.eye(dim)
    diss = np.zeros((dim * dim, dim * dim), dtype=complex)
    for op in ops:
        ldl = op.conj().T @ op
        diss += np.kron(op, op.conj()) - 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T))

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        h = hamiltonian(t)
        r = y.reshape(dim, dim)
        coherent = 1j * (r @ h - h @ r)
        return coherent.reshape(-1) + diss @ y

    y = rho.reshape(-1)
    out = np.empty((grid.size, dim, dim), dtype=complex)
    out[0] = rho
    for k in range(1, grid.size):
        t0, t1 = float(grid[k - 1]), float(grid[k])
        n = _substeps(t0, t1, step)
        dt = (t1 - t0) / n
        for j in range(n):
            y = _rk4(rhs, y, t0 + j * dt, dt)
            r = y.reshape(dim, dim)
            y = (0.5 * (r + r.conj().T)).reshape(-1)
        out[k] = y.reshape(dim, dim)
    return out


def density_audit(rho: np.ndarray) -> dict[str, float]:
    """Trace, Hermiticity defect and smallest eigenvalue of a density matrix."""
    rho = _square(rho, "rho")
    return {
        "trace": float(np.trace(rho).real),
        "hermiticity": matrix_norm_max(rho - rho.conj().T),
        "min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]),
    }


def is_density_matrix(rho: np.ndarray) -> bool:
    audit = density_audit(rho)
    return (audit["hermiticity"] <= 1e-9 and abs(audit["trace"] - 1.0) <= 1e-6
            and audit["min_eigenvalue"] >= -1e-6)
