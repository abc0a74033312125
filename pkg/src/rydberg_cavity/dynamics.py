"""Liouville-space dynamics: master equation, steady states and g2 correlations.

Density matrices are plain ``(d, d)`` complex arrays. Superoperators act on
column-major vectorised matrices, ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .models import ModelSystem, ThreeLevelModel

# Largest Liouville dimension propagated with a dense matrix exponential.
DENSE_LIMIT = 4096

NULLSPACE_RESIDUAL_TOL = 1e-10
PROPAGATION_RESIDUAL_TOL = 1e-8
PROPAGATION_STEP_TOL = 1e-12
DRIFT_TOL = 1e-9
PROPAGATION_T_MAX = 1e4
MIN_PHOTON_NUMBER = 1e-14


class ConvergenceError(RuntimeError):
    """A propagation or steady-state search missed its accuracy contract."""


class DegenerateSteadyStateError(ConvergenceError):
    """The Liouvillian has more than one stationary state."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = math.isqrt(v.shape[0])
    return np.asarray(v).reshape((d, d), order="F")


def _spre(op, eye):
    return sp.kron(eye, op)


def _spost(op, eye):
    return sp.kron(op.T, eye)


def liouvillian_from(hamiltonian, collapse_ops) -> sp.csc_matrix:
    """-i[H, .] + sum_k g_k (2 L . L^+ - L^+L . - . L^+L) as a sparse matrix."""
    d = hamiltonian.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    h = sp.csr_matrix(hamiltonian, dtype=complex)
    out = -1j * (_spre(h, eye) - _spost(h, eye))
    for rate, c in collapse_ops:
        c = sp.csr_matrix(c, dtype=complex)
        cdc = c.conj().T @ c
        out = out + rate * (2.0 * sp.kron(c.conj(), c) - _spre(cdc, eye) - _spost(cdc, eye))
    return out.tocsc()


def build_liouvillian(m: ModelSystem) -> sp.csc_matrix:
    return liouvillian_from(m.hamiltonian, m.collapse_ops)


def commutator_superop(op) -> sp.csc_matrix:
    """-i[op, .] as a superoperator."""
    d = op.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    op = sp.csr_matrix(op, dtype=complex)
    return (-1j * (_spre(op, eye) - _spost(op, eye))).tocsc()


def trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d)
    row[np.arange(d) * (d + 1)] = 1.0
    return row


def expectation(op, rho: np.ndarray) -> complex:
    rho = np.asarray(rho)
    if op.shape != rho.shape:
        raise ValueError(f"basis mismatch: operator {op.shape} vs state {rho.shape}")
    if sp.issparse(op):
        return complex((op.multiply(rho.T)).sum())
    return complex(np.einsum("ij,ji->", op, rho))


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    diff = np.asarray(rho1) - np.asarray(rho2)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


class Propagator:
    """Applies exp(L t) to vectorised operators.

    Small Liouvillians use cached dense step exponentials (scaling and
    squaring); larger ones fall back to ``expm_multiply``. Every call checks
    that trace and Hermiticity drift stay below ``drift_tol`` relative to the
    input scale.
    """

    def __init__(self, L, drift_tol: float = DRIFT_TOL):
        self.L = sp.csc_matrix(L)
        self.dim = self.L.shape[0]
        self.d = math.isqrt(self.dim)
        self.drift_tol = drift_tol
        self._dense = self.L.toarray() if self.dim <= DENSE_LIMIT else None
        self._steps: dict[float, np.ndarray] = {}

    def _step_matrix(self, dt: float) -> np.ndarray:
        key = float(dt)
        if key not in self._steps:
            self._steps[key] = la.expm(self._dense * dt)
        return self._steps[key]

    def _apply(self, v: np.ndarray, dt: float) -> np.ndarray:
        if dt == 0:
            return v
        if self._dense is not None:
            return self._step_matrix(dt) @ v
        return spla.expm_multiply(self.L * dt, v)

    def _check(self, rho0: np.ndarray, rho: np.ndarray, t: float):
        scale = max(abs(np.trace(rho0)), np.abs(rho0).max(), 1e-300)
        drift = abs(np.trace(rho) - np.trace(rho0)) / scale
        herm0 = np.abs(rho0 - rho0.conj().T).max()
        herm = np.abs(rho - rho.conj().T).max()
        if drift > self.drift_tol or (herm - herm0) / scale > self.drift_tol:
            raise ConvergenceError(
                f"propagation to t={t:g} drifted: trace {drift:.2e}, hermiticity {(herm - herm0) / scale:.2e}"
            )

    def evolve(self, rho0: np.ndarray, times) -> np.ndarray:
        """States exp(L t_k) rho0 for a sorted nonnegative time grid, shape (n, d, d)."""
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or (times.size and times[0] < 0) or np.any(np.diff(times) < 0):
            raise ValueError("times must be sorted and nonnegative")
        rho0 = np.asarray(rho0, dtype=complex)
        out = np.empty((times.size, self.d, self.d), dtype=complex)
        v = vec(rho0)
        t_prev = 0.0
        for k, t in enumerate(times):
            # uniform grids reuse one cached step matrix
            v = self._apply(v, round(t - t_prev, 12))
            t_prev = t
            out[k] = unvec(v)
        for k in (0, times.size - 1) if times.size else ():
            self._check(rho0, out[k], times[k])
        return out

    def propagate(self, rho0: np.ndarray, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("t must be >= 0")
        return self.evolve(rho0, [t])[0]


def propagate(L, rho0: np.ndarray, t: float) -> np.ndarray:
    """exp(L t) rho0."""
    return Propagator(L).propagate(rho0, t)


def vacuum(d: int) -> np.ndarray:
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def _finalize(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _bordered_lu(L, pivot: int = 0):
    """LU of L with the row of diagonal element ``pivot`` replaced by the trace.

    The trace functional is a left null vector of any Lindblad generator, so
    the diagonal rows are linearly dependent and one of them carries no
    information. Replacing it fixes the normalisation of stationary states
    and makes the system invertible when the stationary state is unique.
    """
    d = math.isqrt(L.shape[0])
    row = pivot * (d + 1)
    M = sp.lil_matrix(L)
    M[row, :] = trace_row(d)
    try:
        lu = spla.splu(M.tocsc())
    except RuntimeError as exc:
        raise DegenerateSteadyStateError(f"singular bordered Liouvillian: {exc}") from exc
    u = np.abs(lu.U.diagonal())
    if u.min() <= 1e-13 * u.max():
        raise DegenerateSteadyStateError("stationary subspace has dimension > 1")
    return lu, row


def _steady_nullspace(L, tol: float) -> np.ndarray:
    d = math.isqrt(L.shape[0])
    lu, row = _bordered_lu(L)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[row] = 1.0
    v = lu.solve(rhs)
    residual = np.abs(L @ v).max()
    if not residual < tol:
        raise DegenerateSteadyStateError(f"null-space residual {residual:.2e} exceeds {tol:.0e}")
    return _finalize(unvec(v))


def _steady_propagation(L, step: float, step_tol: float, t_max: float, tol: float) -> np.ndarray:
    d = math.isqrt(L.shape[0])
    prop = Propagator(L)
    rho = vacuum(d)
    t = 0.0
    while t < t_max:
        nxt = prop.propagate(rho, step)
        t += step
        change = np.abs(nxt - rho).max()
        rho = nxt
        if change < step_tol:
            residual = np.abs(L @ vec(rho)).max()
            if residual >= tol:
                raise ConvergenceError(f"propagated state residual {residual:.2e} exceeds {tol:.0e}")
            return _finalize(rho)
    raise ConvergenceError(f"no stationary state reached by t = {t_max:g}")


def steady_state(L, method: str = "nullspace", *, tol: float | None = None, step: float = 5.0,
                 step_tol: float = PROPAGATION_STEP_TOL, t_max: float = PROPAGATION_T_MAX) -> np.ndarray:
    """Stationary density matrix of ``L``.

    ``"nullspace"`` solves the trace-bordered linear system directly;
    ``"propagation"`` evolves the vacuum until successive states separated by
    ``step`` differ by less than ``step_tol``.
    """
    if method == "nullspace":
        return _steady_nullspace(L, NULLSPACE_RESIDUAL_TOL if tol is None else tol)
    if method == "propagation":
        return _steady_propagation(L, step, step_tol, t_max, PROPAGATION_RESIDUAL_TOL if tol is None else tol)
    raise ValueError(f"unknown steady-state method {method!r}")


def photon_moments(m: ModelSystem, rho: np.ndarray) -> tuple[float, float]:
    """(<a^+ a>, <a^+ a^+ a a>) in ``rho``."""
    a = m.cavity_op
    ad = a.conj().T
    n = expectation(ad @ a, rho).real
    pairs = expectation(ad @ ad @ a @ a, rho).real
    return n, pairs


def g2_zero(m: ModelSystem, rho_ss: np.ndarray) -> float:
    n, pairs = photon_moments(m, rho_ss)
    if not n > MIN_PHOTON_NUMBER:
        raise ZeroDivisionError(f"<a^+a> = {n:.3e} too small for g2")
    return pairs / n**2


@dataclass
class CorrelationTrace:
    tau: np.ndarray
    g2: np.ndarray
    metadata: dict = field(default_factory=dict)


def g2_tau(m: ModelSystem, rho_ss: np.ndarray, tau_grid, L=None) -> CorrelationTrace:
    """Normalised intensity correlation via quantum regression.

    The conditional operator ``a rho_ss a^+`` is propagated under the same
    Liouvillian and traced against ``a^+ a``. For the stationary field the
    two-time function only depends on |t2 - t1|, so one delay axis suffices.
    """
    L = build_liouvillian(m) if L is None else L
    a = m.cavity_op
    ad = a.conj().T
    n, _ = photon_moments(m, rho_ss)
    if not n > MIN_PHOTON_NUMBER:
        raise ZeroDivisionError(f"<a^+a> = {n:.3e} too small for g2")
    conditional = a @ rho_ss @ ad
    conditional = np.asarray(conditional)
    states = Propagator(L).evolve(conditional, tau_grid)
    number = (ad @ a).toarray()
    numer = np.einsum("ij,kji->k", number, states).real
    return CorrelationTrace(np.asarray(tau_grid, dtype=float), numer / n**2, {"variant": m.variant.value, "n_ss": n})


def perturbative_moments(m: ModelSystem, order: int = 4) -> list[np.ndarray]:
    """Steady-state Taylor coefficients rho_k in rho_ss = sum_k alpha^k rho_k.

    With L = L0 + alpha L1 (L1 = -i[a + a^+, .]) the coefficients obey
    L0 rho_{k+1} = -L1 rho_k, rho_0 the undriven stationary state. Every
    correction is traceless, which the trace-bordered factorisation of L0
    enforces.
    """
    L0 = liouvillian_from(m.undriven_hamiltonian(), m.collapse_ops)
    L1 = commutator_superop(m.drive_op)
    lu, row = _bordered_lu(L0)
    d = m.basis.dim
    rhs = np.zeros(d * d, dtype=complex)
    rhs[row] = 1.0
    coeffs = [lu.solve(rhs)]
    for _ in range(order):
        rhs = -(L1 @ coeffs[-1])
        rhs[row] = 0.0
        coeffs.append(lu.solve(rhs))
    return [unvec(c) for c in coeffs]


def g2_zero_perturbative(m: ModelSystem) -> float:
    """Leading weak-drive g2(0): [alpha^4 coeff of <a^+a^+aa>] / [alpha^2 coeff of <a^+a>]^2."""
    rho = perturbative_moments(m, order=4)
    n2 = photon_moments(m, rho[2])[0]
    pairs4 = photon_moments(m, rho[4])[1]
    if not abs(n2) > 0:
        raise ZeroDivisionError("second-order photon number vanishes")
    return pairs4 / n2**2


def h3_amplitudes(h3: ThreeLevelModel, psi0, t_grid) -> np.ndarray:
    """psi(t) = exp(-i H3 t) psi0 on a sorted grid, shape (n, 3). Norm is not conserved."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size and (t_grid[0] < 0 or np.any(np.diff(t_grid) < 0)):
        raise ValueError("t_grid must be sorted and nonnegative")
    psi0 = np.asarray(psi0, dtype=complex)
    return np.array([la.expm(-1j * h3.matrix * t) @ psi0 for t in t_grid])
