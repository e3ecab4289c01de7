"""Global master equation built from eigenoperators of the coupled Hamiltonian.

Two constructions of the jump operators are available:

``"printed"``
    The fixed matrices obtained from the symmetric eigenbasis
    ``(|eg> +- |ge>)/sqrt(2)``. They are exact eigenoperators only when
    ``omega_a == omega_b`` but reproduce the element-wise equations of
    motion used for the closed forms.
``"spectral"``
    Projection of the bare lowering operators onto the true eigenspaces of
    ``H``; always eigenoperators.

Rates follow ``gamma * tau(omega)`` with ``tau = omega^3 e^{x/2} / sinh(x/2)``,
``x = omega / T``. With ``absorption=True`` the reverse jumps ``A^dag`` are
added with ``tau(-omega) = 2 omega^3 n(omega)``, which makes each bath
detailed-balanced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import core
from .core import EngineParams, ParameterError
from .lme import ClosedFormReport
from .oracle import evolve
from .superop import AffineGenerator, commutator_superop, dissipator

OPERATORS = ("printed", "spectral")


def transition_frequencies(params: EngineParams) -> tuple[float, float]:
    """``(omega_plus, omega_minus)``; raises if ``omega_minus <= 0``."""
    w_p, w_m = core.dressed_energies(params.omega_a, params.omega_b, params.g)
    if w_m <= 0:
        raise ParameterError(f"omega_minus = {w_m:.3g} <= 0: outside the model's validity")
    return w_p, w_m


def spectral_tensor(omega: float, temperature: float) -> float:
    """Emission strength ``omega^3 e^{x/2} / sinh(x/2)`` with ``x = omega/T``."""
    if omega <= 0:
        raise ParameterError("frequency must be positive")
    if temperature < 0:
        raise ParameterError("temperature must be non-negative")
    if temperature == 0:
        return 2.0 * omega**3
    x = omega / temperature
    # e^{x/2}/sinh(x/2) == 2/(1 - e^{-x}); this form does not overflow
    return omega**3 * 2.0 / -math.expm1(-x)


def absorption_tensor(omega: float, temperature: float) -> float:
    """The same function at ``-omega``: ``omega^3 e^{-x/2} / sinh(x/2)``."""
    if omega <= 0:
        raise ParameterError("frequency must be positive")
    return 2.0 * omega**3 * core.thermal_occupation(omega, temperature)


@dataclass(frozen=True)
class GlobalRates:
    """Sum/difference combinations of the per-channel rates.

    ``delta_*`` belong to the hot bath and ``Omega_*`` to the cold bath:
    ``delta_plus = gamma_h (tau(w+) + tau(w-))``,
    ``delta_minus = gamma_h (tau(w+) - tau(w-))``. ``absorption`` holds the
    same four combinations for the reverse jumps, or ``None``.
    """

    delta_plus: float
    delta_minus: float
    Omega_plus: float
    Omega_minus: float
    absorption: Optional["GlobalRates"] = None

    def channel(self, bath: str, branch: str) -> float:
        s, d = (self.delta_plus, self.delta_minus) if bath == "h" else (self.Omega_plus, self.Omega_minus)
        return (s + d) / 2 if branch == "+" else (s - d) / 2

    def scaled(self, hot: float, cold: float, *, differences: bool = True) -> "GlobalRates":
        """Multiply the hot and cold combinations by the given factors.

        With ``differences=False`` only the ``plus`` combinations are scaled.
        """
        dh = hot if differences else 1.0
        dc = cold if differences else 1.0
        absorbed = None if self.absorption is None else self.absorption.scaled(hot, cold, differences=differences)
        return replace(self, delta_plus=self.delta_plus * hot, delta_minus=self.delta_minus * dh,
                       Omega_plus=self.Omega_plus * cold, Omega_minus=self.Omega_minus * dc,
                       absorption=absorbed)

    @property
    def S_plus(self) -> float:
        return self.delta_plus + self.Omega_plus

    @property
    def S_minus(self) -> float:
        return self.delta_minus + self.Omega_minus


def gme_rates(params: EngineParams, *, absorption: bool = True) -> GlobalRates:
    w_p, w_m = transition_frequencies(params)

    def combos(fn):
        th_p, th_m = fn(w_p, params.t_h), fn(w_m, params.t_h)
        tc_p, tc_m = fn(w_p, params.t_c), fn(w_m, params.t_c)
        return (params.gamma_h * (th_p + th_m), params.gamma_h * (th_p - th_m),
                params.gamma_c * (tc_p + tc_m), params.gamma_c * (tc_p - tc_m))

    up = GlobalRates(*combos(absorption_tensor)) if absorption else None
    return GlobalRates(*combos(spectral_tensor), absorption=up)


@dataclass(frozen=True)
class JumpOperatorSet:
    """Lowering eigenoperators per bath (``h``, ``c``) and branch (``+``, ``-``)."""

    Ah_plus: np.ndarray
    Ah_minus: np.ndarray
    Ac_plus: np.ndarray
    Ac_minus: np.ndarray
    construction: str = "printed"

    def get(self, bath: str, branch: str) -> np.ndarray:
        return {
            ("h", "+"): self.Ah_plus, ("h", "-"): self.Ah_minus,
            ("c", "+"): self.Ac_plus, ("c", "-"): self.Ac_minus,
        }[bath, branch]

    def items(self):
        for bath in ("h", "c"):
            for branch in ("+", "-"):
                yield bath, branch, self.get(bath, branch)


def printed_jump_operators() -> JumpOperatorSet:
    def hot(s):
        a = np.zeros((4, 4), dtype=complex)
        a[0, 1], a[0, 2], a[1, 3], a[2, 3] = 0.5, s * 0.5, -s * 0.5, 0.5
        return a

    def cold(s):
        a = np.zeros((4, 4), dtype=complex)
        a[0, 1], a[0, 2], a[1, 3], a[2, 3] = s * 0.5, 0.5, 0.5, -s * 0.5
        return a

    return JumpOperatorSet(hot(1), hot(-1), cold(1), cold(-1), "printed")


def spectral_jump_operators(params: EngineParams, tol: float = 1e-9) -> JumpOperatorSet:
    """Sum of ``Pi(e) sigma Pi(e')`` over eigenpairs with ``e' - e = omega_+-``."""
    spec = core.eigendecompose(core.build_hamiltonian(params))
    w_p, w_m = transition_frequencies(params)
    if abs(w_p - w_m) < tol:
        raise ParameterError("omega_plus == omega_minus: branches cannot be separated")
    projectors = [spec.projector(k) for k in range(4)]
    ev = spec.eigenvalues

    def project(sigma, omega):
        out = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            for j in range(4):
                if abs(ev[j] - ev[i] - omega) < tol:
                    out += projectors[i] @ sigma @ projectors[j]
        return out

    # fix the eigenvector phase freedom by the sign of <gg|A|single excitation>
    ops = [project(core.SIGMA_A, w_p), project(core.SIGMA_A, w_m),
           project(core.SIGMA_B, w_p), project(core.SIGMA_B, w_m)]
    return JumpOperatorSet(*ops, construction="spectral")


def jump_operators(params: Optional[EngineParams] = None, construction: str = "printed") -> JumpOperatorSet:
    if construction == "printed":
        return printed_jump_operators()
    if construction == "spectral":
        if params is None:
            raise ParameterError("spectral construction needs parameters")
        return spectral_jump_operators(params)
    raise ParameterError(f"unknown construction {construction!r}; expected one of {OPERATORS}")


def eigenoperator_residual(h: np.ndarray, a: np.ndarray, omega: float) -> float:
    """``max |[H, A] + omega A|``."""
    return float(np.max(np.abs(h @ a - a @ h + omega * a)))


def gme_generator(params: EngineParams, *, rates: Optional[GlobalRates] = None,
                  operators: str = "printed", absorption: bool = True,
                  hamiltonian: bool = True) -> AffineGenerator:
    """Lindblad generator summed over baths and the two transition branches.

    ``rates`` overrides :func:`gme_rates` (used for distance-dependent rates).
    Its absorption part is ignored when ``absorption`` is false.
    """
    if rates is None:
        rates = gme_rates(params, absorption=absorption)
    ops = jump_operators(params, operators)
    up = rates.absorption if absorption else None
    if absorption and up is None:
        raise ParameterError("absorption requested but the rates carry no absorption part")
    for source in (rates, up):
        if source is None:
            continue
        for bath in ("h", "c"):
            for branch in ("+", "-"):
                if source.channel(bath, branch) < 0:
                    raise ParameterError(
                        f"negative rate on channel {bath}{branch}: the generator would not be "
                        "completely positive")
    parts = {"h": np.zeros((16, 16), dtype=complex), "c": np.zeros((16, 16), dtype=complex)}
    for bath, branch, a in ops.items():
        parts[bath] += rates.channel(bath, branch) * dissipator(a)
        if up is not None:
            parts[bath] += up.channel(bath, branch) * dissipator(a.conj().T)
    coherent = commutator_superop(core.build_hamiltonian(params)) if hamiltonian else None
    return AffineGenerator.from_parts(hamiltonian=coherent, hot=parts["h"], cold=parts["c"])


def gme_propagate(rho0: np.ndarray, params: EngineParams, t: float, **options) -> np.ndarray:
    if t < 0:
        raise ParameterError("t must be non-negative")
    rho = evolve(gme_generator(params, **options), rho0, t)
    return (rho + rho.conj().T) / 2


def eigenbasis_order() -> np.ndarray:
    """Columns |gg>, |ee>, |+>, |->, the labelling of the symmetric eigenbasis."""
    s = 1 / math.sqrt(2)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = 1
    u[3, 1] = 1
    u[1, 2], u[2, 2] = s, s
    u[1, 3], u[2, 3] = s, -s
    return u


def printed_global_elements(rho0: np.ndarray, rates: GlobalRates, t: float) -> dict:
    """Printed global closed forms, 0-based keys, initial data read from ``rho0``."""
    sp, sm = rates.S_plus, rates.S_minus
    r = np.asarray(rho0, dtype=complex)
    e_half = math.exp(-t / 2 * sp)
    e_quarter = math.exp(-t / 4 * sp)
    e_sum = math.exp(-t / 4 * (sp + sm))
    with np.errstate(over="ignore"):
        e_diff = np.exp(t / 4 * (sm - sp))
    return {
        (0, 0): r[0, 0] + r[1, 1] * e_half - 2 * r[2, 2] * e_sum + 2 * r[3, 3] * e_diff,
        (1, 1): -r[1, 1] * e_half - r[1, 2] * e_quarter + r[2, 2] * e_sum - r[3, 3] * e_diff,
        (2, 2): -r[1, 1] * e_half + r[2, 2] * e_sum - r[3, 3] * e_diff + r[1, 2] * e_quarter,
        (3, 3): r[1, 1] * e_half,
        (1, 2): 2 * r[2, 2] * e_sum - 2 * r[3, 3] * e_diff + r[1, 2] * e_quarter,
    }


def printed_global_derivatives(rho: np.ndarray, rates: GlobalRates) -> dict:
    """Right-hand sides of the printed element-wise global equations of motion."""
    dp, dm, op, om = rates.delta_plus, rates.delta_minus, rates.Omega_plus, rates.Omega_minus
    sp, sm = dp + op, dm + om
    p = np.asarray(rho, dtype=complex)
    return {
        (0, 0): sp / 4 * (p[1, 1] + p[2, 2]) + sm / 4 * (p[1, 2] + p[2, 1]),
        (1, 1): sp / 4 * (p[3, 3] - p[1, 1]) - sm / 8 * (p[1, 2] + p[2, 1]),
        (2, 2): sp / 4 * (p[3, 3] - p[2, 2]) - sm / 8 * (p[1, 2] + p[2, 1]),
        (3, 3): -sp / 2 * p[3, 3],
        (1, 2): -sp / 4 * p[1, 2] - sm / 8 * (p[1, 1] + p[2, 2] + 2 * p[3, 3]),
        (0, 1): (-(dm - om) / 4 * p[1, 3] - (dp - op) / 4 * p[2, 3]
                 - (dm + op) / 8 * p[0, 1] - (dp - om) / 8 * p[0, 2]),
        (0, 2): ((dp - op) / 4 * p[1, 3] + (dm - om) / 4 * p[2, 3]
                 - (dm + om) / 8 * p[0, 1] - (dp - op) / 8 * p[0, 2]),
        (0, 3): -sp / 4 * p[0, 3],
        (1, 3): -3 * sp / 8 * p[1, 3] - sm / 8 * p[2, 3],
        (2, 3): -3 * sp / 8 * p[2, 3] - sm / 8 * p[1, 3],
    }


def eom_discrepancy(rho: np.ndarray, params: EngineParams, **options) -> dict:
    """``|printed - generator|`` for each printed global equation of motion.

    Defaults to the construction the printed equations correspond to:
    printed operators, emission only, no coherent term.
    """
    options = {"operators": "printed", "absorption": False, "hamiltonian": False, **options}
    rates = gme_rates(params, absorption=options["absorption"])
    exact = gme_generator(params, rates=rates, **options).apply(rho)
    return {k: float(abs(v - exact[k])) for k, v in printed_global_derivatives(rho, rates).items()}


@dataclass(frozen=True)
class GlobalClosedFormReport:
    product: ClosedFormReport
    eigen: ClosedFormReport

    @property
    def best_ordering(self) -> str:
        a, b = self.product.max_deviation, self.eigen.max_deviation
        if not math.isfinite(b) or (math.isfinite(a) and a <= b):
            return "product"
        return "eigen"

    @property
    def best(self) -> ClosedFormReport:
        return self.product if self.best_ordering == "product" else self.eigen

    @property
    def max_deviation(self) -> float:
        return self.best.max_deviation


def gme_printed_closed_form(rho0: np.ndarray, params: EngineParams, t: float,
                          **options) -> GlobalClosedFormReport:
    """Printed global solution read in both index orderings; never asserts.

    The reference propagation defaults to the printed-operator,
    emission-only, dissipator-only generator.
    """
    options = {"operators": "printed", "absorption": False, "hamiltonian": False, **options}
    rates = gme_rates(params, absorption=options["absorption"])
    reference = gme_propagate(rho0, params, t, rates=rates, **options)
    reports = []
    for label, u in (("product", np.eye(4)), ("eigen", eigenbasis_order())):
        r0 = u.conj().T @ rho0 @ u
        ref = u.conj().T @ reference @ u
        elements = printed_global_elements(r0, rates, t)
        printed = np.zeros((4, 4), dtype=complex)
        for (i, j), v in elements.items():
            printed[i, j] = v
            printed[j, i] = np.conj(v)
        with np.errstate(invalid="ignore"):
            dev = {k: float(abs(v - ref[k])) for k, v in elements.items()}
        reports.append(ClosedFormReport(t, printed, ref, elements, dev, (f"{label} ordering",)))
    return GlobalClosedFormReport(*reports)
