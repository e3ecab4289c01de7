"""Two-qubit Hilbert space: operators, Hamiltonian, states and checks.

Basis order used everywhere in the package::

    0: |g1 g2>   1: |e1 g2>   2: |g1 e2>   3: |e1 e2>

Qubit A is the first label (``e1``), qubit B the second. In Kronecker
form an operator ``X`` acting on A alone is ``kron(I2, X)`` and an operator
``Y`` acting on B alone is ``kron(Y, I2)``. Natural units, hbar = k_B = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIGEN_TOL = 1e-9

BASIS_LABELS = ("gg", "eg", "ge", "ee")

I2 = np.eye(2, dtype=complex)
# single-qubit lowering operator |g><e| with g -> index 0, e -> index 1
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
# sigma_z = |e><e| - |g><g| in the (g, e) ordering
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)


class ParameterError(ValueError):
    """Raised when physical parameters or inputs violate their domain."""


def on_a(op: np.ndarray) -> np.ndarray:
    """Embed a single-qubit operator acting on qubit A."""
    return np.kron(I2, op)


def on_b(op: np.ndarray) -> np.ndarray:
    """Embed a single-qubit operator acting on qubit B."""
    return np.kron(op, I2)


SIGMA_A = on_a(SIGMA_MINUS)
SIGMA_B = on_b(SIGMA_MINUS)


@dataclass(frozen=True)
class EngineParams:
    """Physical knobs of the two-qubit engine.

    Qubit A (frequency ``omega_a``) is coupled to the hot bath, qubit B
    (``omega_b``) to the cold bath. ``detuning`` overrides the value used in
    ``theta = arctan(g / detuning)``; by default it is ``omega_a - omega_b``.
    """

    omega_a: float = 1.0
    omega_b: float = 0.4
    g: float = 0.1
    t_c: float = 15.0
    t_h: float = 70.0
    gamma_h: float = 1.0
    gamma_c: float = 1.0
    p: float = 1.0
    r12: Optional[float] = None
    k0: Optional[float] = None
    mu_dot_r: Optional[float] = None
    detuning: Optional[float] = None

    def __post_init__(self):
        validate_params(self)

    def with_(self, **changes) -> "EngineParams":
        return replace(self, **changes)

    @property
    def delta(self) -> float:
        return self.omega_a - self.omega_b if self.detuning is None else self.detuning

    @property
    def theta(self) -> float:
        return math.atan2(self.g, self.delta)


def validate_params(params: EngineParams) -> None:
    values = [params.omega_a, params.omega_b, params.g, params.t_c, params.t_h,
              params.gamma_h, params.gamma_c, params.p]
    if not all(math.isfinite(v) for v in values):
        raise ParameterError("parameters must be finite")
    if not params.omega_b < params.omega_a:
        raise ParameterError(f"need omega_b < omega_a, got {params.omega_b} >= {params.omega_a}")
    if params.omega_b <= 0:
        raise ParameterError("qubit frequencies must be positive")
    if not params.t_h > params.t_c > 0:
        raise ParameterError(f"need t_h > t_c > 0, got t_h={params.t_h}, t_c={params.t_c}")
    if not 0.0 <= params.p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {params.p}")
    if params.g < 0:
        raise ParameterError("coupling g must be non-negative")
    if params.gamma_h <= 0 or params.gamma_c <= 0:
        raise ParameterError("bath couplings must be positive")
    if params.r12 is not None and params.r12 < 0:
        raise ParameterError("r12 must be non-negative")
    if params.k0 is not None and params.k0 <= 0:
        raise ParameterError("k0 must be positive")
    if params.mu_dot_r is not None and abs(params.mu_dot_r) > 1:
        raise ParameterError("mu_dot_r must lie in [-1, 1]")


def hamiltonian_matrix(omega_a: float, omega_b: float, g: float) -> np.ndarray:
    """Two-qubit Hamiltonian with exchange coupling ``g/2 (s_A^+ s_B + h.c.)``."""
    h = np.diag([0.0, omega_a, omega_b, omega_a + omega_b]).astype(complex)
    h[1, 2] = h[2, 1] = g / 2
    return h


def build_hamiltonian(params: EngineParams) -> np.ndarray:
    validate_params(params)
    return hamiltonian_matrix(params.omega_a, params.omega_b, params.g)


def hermiticity_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    def projector(self, k: int) -> np.ndarray:
        v = self.eigenvectors[:, k]
        return np.outer(v, v.conj())

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigendecompose(h: np.ndarray, tol: float = HERMITIAN_TOL) -> Spectrum:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ParameterError("expected a square matrix")
    if hermiticity_deviation(h) > tol:
        raise ParameterError("matrix is not Hermitian")
    w, v = np.linalg.eigh(h)
    return Spectrum(w, v)


def dressed_energies(omega_a: float, omega_b: float, g: float) -> tuple[float, float]:
    """Energies of the single-excitation doublet, ``(omega_plus, omega_minus)``."""
    root = math.hypot(omega_a - omega_b, g)
    s = omega_a + omega_b
    return (s + root) / 2, (s - root) / 2


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def initial_state_phi(p: float) -> np.ndarray:
    """``sqrt(p)|e1 g2> + sqrt(1-p)|g1 e2>`` as a density matrix."""
    if not 0.0 <= p <= 1.0 or not math.isfinite(p):
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    return projector(ket(0, math.sqrt(p), math.sqrt(1 - p), 0))


def initial_state_psi(theta: float) -> np.ndarray:
    """``cos(theta)|e1 g2> - sin(theta)|g1 e2>`` as a density matrix."""
    if not math.isfinite(theta):
        raise ParameterError("theta must be finite")
    return projector(ket(0, math.cos(theta), -math.sin(theta), 0))


def mixing_angle(g: float, detuning: float) -> float:
    return math.atan2(g, detuning)


def partial_trace(rho: np.ndarray, keep: str) -> np.ndarray:
    """Reduced 2x2 state of qubit ``"A"`` or ``"B"`` in the (g, e) ordering."""
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)  # [b, a, b', a']
    if keep == "A":
        return np.einsum("iaib->ab", r)
    if keep == "B":
        return np.einsum("aibi->ab", r)
    raise ParameterError(f"keep must be 'A' or 'B', got {keep!r}")


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation ``1 / (exp(omega / T) - 1)``."""
    if omega <= 0:
        raise ParameterError("frequency must be positive")
    if temperature < 0:
        raise ParameterError("temperature must be non-negative")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    # e^{-x} / (1 - e^{-x}) underflows gracefully instead of overflowing
    return math.exp(-x) / -math.expm1(-x)


def gibbs_qubit(omega: float, temperature: float) -> np.ndarray:
    """Thermal state of a qubit with gap ``omega``, ordered (g, e)."""
    n = thermal_occupation(omega, temperature)
    excited = n / (2 * n + 1)
    return np.diag([1 - excited, excited]).astype(complex)


def gibbs_state(h: np.ndarray, temperature: float) -> np.ndarray:
    spec = eigendecompose(h)
    w = np.exp(-(spec.eigenvalues - spec.eigenvalues.min()) / temperature)
    w /= w.sum()
    v = spec.eigenvectors
    return (v * w) @ v.conj().T


def product_state(rho_a: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    return np.kron(rho_b, rho_a)


@dataclass(frozen=True)
class DensityReport:
    trace_deviation: float
    hermiticity_deviation: float
    min_eigenvalue: float
    tol_trace: float = TRACE_TOL
    tol_hermitian: float = HERMITIAN_TOL
    tol_eigen: float = EIGEN_TOL

    @property
    def trace_ok(self) -> bool:
        return self.trace_deviation <= self.tol_trace

    @property
    def hermitian_ok(self) -> bool:
        return self.hermiticity_deviation <= self.tol_hermitian

    @property
    def positive_ok(self) -> bool:
        return self.min_eigenvalue >= -self.tol_eigen

    @property
    def ok(self) -> bool:
        return self.trace_ok and self.hermitian_ok and self.positive_ok


def validate_density_matrix(rho: np.ndarray, tol: Optional[float] = None) -> DensityReport:
    """Diagnose trace, Hermiticity and positivity; never raises.

    A single ``tol`` overrides all three thresholds.
    """
    rho = np.asarray(rho, dtype=complex)
    herm = hermiticity_deviation(rho)
    sym = (rho + rho.conj().T) / 2
    min_ev = float(np.linalg.eigvalsh(sym).min())
    kw = {} if tol is None else dict(tol_trace=tol, tol_hermitian=tol, tol_eigen=tol)
    return DensityReport(abs(complex(np.trace(rho)) - 1.0), herm, min_ev, **kw)
