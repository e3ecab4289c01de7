"""Independent numerical paths used to check the propagators and closed forms.

Two routes to ``rho(t)`` are kept deliberately separate: a fixed-step
classical Runge-Kutta integrator working on the matrix form of the
equation of motion, and the matrix exponential of the vectorised generator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, null_space

from .core import ParameterError
from .superop import AffineGenerator, trace_row, unvec, vec

log = logging.getLogger(__name__)

DEFAULT_DT = 1e-3


class IntegrationError(RuntimeError):
    """Raised when step refinement cannot reach the requested accuracy."""


class SteadyStateError(RuntimeError):
    """Raised when the generator has no unique trace-one fixed point."""

    def __init__(self, message: str, multiplicity: int):
        super().__init__(message)
        self.multiplicity = multiplicity


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n_times, d, d)
    max_hermitization: float = 0.0
    dt: float = DEFAULT_DT

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _as_matrix(generator) -> np.ndarray:
    if isinstance(generator, AffineGenerator):
        if np.any(generator.affine):
            raise ParameterError("affine generators are not supported by this routine")
        return generator.matrix
    return np.asarray(generator, dtype=complex)


def _rk4_fixed(rhs, rho0: np.ndarray, n_steps: int, dt: float, store_every: int):
    rho = np.array(rho0, dtype=complex)
    stored = [rho.copy()]
    worst = 0.0
    for k in range(1, n_steps + 1):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        k3 = rhs(rho + 0.5 * dt * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        herm = (rho + rho.conj().T) / 2
        worst = max(worst, float(np.max(np.abs(herm - rho))))
        rho = herm
        if k % store_every == 0:
            stored.append(rho.copy())
    return np.array(stored), worst


def rk4_integrate(generator, rho0: np.ndarray, tmax: float, dt: float = DEFAULT_DT,
                  *, store_every: int = 1, check: bool = True, tol: float = 1e-9,
                  min_dt: float = 1e-6) -> Trajectory:
    """Classical fixed-step RK4 for ``d rho/dt = L[rho]``.

    ``tmax`` must be an integer multiple of ``dt``. With ``check`` the run is
    repeated at ``dt/2``; if the endpoints differ by more than ``tol`` the
    step is halved until they agree or ``dt`` falls below ``min_dt``.
    """
    if tmax < 0:
        raise ParameterError("tmax must be non-negative")
    if dt <= 0:
        raise ParameterError("dt must be positive")
    lmat = _as_matrix(generator)
    dim = int(round(np.sqrt(lmat.shape[0])))

    def rhs(rho):
        return unvec(lmat @ vec(rho), dim)

    def run(step, every):
        n = int(round(tmax / step))
        if not np.isclose(n * step, tmax, rtol=0, atol=1e-12 * max(1.0, tmax)):
            raise ParameterError("tmax must be a multiple of dt")
        states, worst = _rk4_fixed(rhs, rho0, n, step, every)
        return states, worst

    states, worst = run(dt, store_every)
    while check:
        fine, worst_fine = run(dt / 2, 2 * store_every)
        gap = float(np.max(np.abs(fine[-1] - states[-1])))
        if gap <= tol:
            break
        if dt / 2 < min_dt:
            raise IntegrationError(f"step halving did not converge (gap {gap:.2e} at dt={dt:.1e})")
        dt, states, worst = dt / 2, fine, worst_fine
        store_every *= 2
    if worst > 0:
        log.debug("rk4: largest re-Hermitisation correction %.3e", worst)
    times = np.arange(states.shape[0]) * dt * store_every
    return Trajectory(times, states, worst, dt)


def superoperator_exponential(generator, t: float) -> np.ndarray:
    """``exp(L t)`` by scipy's scaling-and-squaring Pade algorithm."""
    if t < 0:
        raise ParameterError("t must be non-negative")
    return expm(_as_matrix(generator) * t)


def evolve(generator, rho0: np.ndarray, t: float) -> np.ndarray:
    prop = superoperator_exponential(generator, t)
    return unvec(prop @ vec(rho0))


def steady_state(generator, tol: float = 1e-10) -> np.ndarray:
    """Unique trace-one fixed point of ``L``."""
    lmat = _as_matrix(generator)
    dim = int(round(np.sqrt(lmat.shape[0])))
    ker = null_space(lmat, rcond=tol)
    if ker.shape[1] != 1:
        raise SteadyStateError(f"null space has dimension {ker.shape[1]}", ker.shape[1])
    v = ker[:, 0]
    tr = trace_row(dim) @ v
    if abs(tr) < 1e-14:
        raise SteadyStateError("kernel vector is traceless", 1)
    rho = unvec(v / tr, dim)
    return (rho + rho.conj().T) / 2


@dataclass(frozen=True)
class TrajectoryComparison:
    max_abs_deviation: float
    per_element_deviation: np.ndarray
    worst_time: float


def compare_trajectories(a: np.ndarray, b: np.ndarray, times=None) -> TrajectoryComparison:
    """Element-wise deviation statistics of two state sequences on one grid."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ParameterError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a, b = a[None], b[None]
    diff = np.abs(a - b)
    per_time = diff.reshape(diff.shape[0], -1).max(axis=1)
    k = int(np.argmax(per_time))
    times = np.arange(a.shape[0]) if times is None else np.asarray(times)
    return TrajectoryComparison(float(per_time[k]), diff.max(axis=0), float(times[k]))
