"""Local master equation: each qubit relaxes through its own bare jump operators.

Qubit A sees the hot bath, qubit B the cold bath. The generator is the
Lindblad form ``gamma (n D[s^+] + (n + 1) D[s^-])`` for each qubit, plus the
coherent part ``-i[H, .]`` unless ``hamiltonian=False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import core
from .core import EngineParams, ParameterError
from .oracle import evolve
from .superop import AffineGenerator, commutator_superop, dissipator


@dataclass(frozen=True)
class LocalRates:
    """Emission (``plus``) and absorption (``minus``) rates per qubit."""

    gamma_a_plus: float
    gamma_a_minus: float
    gamma_b_plus: float
    gamma_b_minus: float

    @property
    def total(self) -> float:
        return self.gamma_a_plus + self.gamma_a_minus + self.gamma_b_plus + self.gamma_b_minus


def local_rates(params: EngineParams) -> LocalRates:
    n_a = core.thermal_occupation(params.omega_a, params.t_h)
    n_b = core.thermal_occupation(params.omega_b, params.t_c)
    return LocalRates(
        (n_a + 1) * params.gamma_h, n_a * params.gamma_h,
        (n_b + 1) * params.gamma_c, n_b * params.gamma_c,
    )


def lme_generator(params: EngineParams, *, hamiltonian: bool = True) -> AffineGenerator:
    r = local_rates(params)
    s_a, s_b = core.SIGMA_A, core.SIGMA_B
    hot = r.gamma_a_plus * dissipator(s_a) + r.gamma_a_minus * dissipator(s_a.conj().T)
    cold = r.gamma_b_plus * dissipator(s_b) + r.gamma_b_minus * dissipator(s_b.conj().T)
    coherent = commutator_superop(core.build_hamiltonian(params)) if hamiltonian else None
    return AffineGenerator.from_parts(hamiltonian=coherent, hot=hot, cold=cold)


def lme_propagate(rho0: np.ndarray, params: EngineParams, t: float, *,
                  hamiltonian: bool = True) -> np.ndarray:
    if t < 0:
        raise ParameterError("t must be non-negative")
    rho = evolve(lme_generator(params, hamiltonian=hamiltonian), rho0, t)
    return (rho + rho.conj().T) / 2


@dataclass(frozen=True)
class ClosedFormReport:
    """Printed closed-form elements side by side with the propagated state.

    ``elements`` maps 0-based ``(i, j)`` index pairs to the printed value;
    ``deviation`` holds ``|printed - propagated|`` for the same pairs.
    """

    t: float
    printed: np.ndarray
    reference: np.ndarray
    elements: dict
    deviation: dict
    notes: tuple = ()

    @property
    def max_deviation(self) -> float:
        vals = [v for v in self.deviation.values() if math.isfinite(v)]
        return max(vals) if vals else float("nan")


def _eta_xi_kappa_chi(r: LocalRates, t: float):
    ap, am = r.gamma_a_plus, r.gamma_a_minus
    # the radicand repeats gamma_A^- twice as printed
    root = math.sqrt(am**2 + ap**2 + 6 * am * am)
    eta_p = (root + (am + ap)) / (2 * ap)
    eta_m = (root - (am + ap)) / (2 * ap)
    # growing exponentials overflow to inf for long times; that is reported
    with np.errstate(over="ignore", invalid="ignore"):
        e_p, e_m = np.exp(eta_p * ap * t), np.exp(eta_m * ap * t)
        e_neg = np.exp(-eta_m * ap * t)
        xi_p = eta_p * e_p + eta_m * e_m
        xi_m = eta_p * e_m + eta_m * e_p
        kappa = eta_p * eta_m * (e_neg - e_p)
        chi = e_neg - e_p
    return eta_p, eta_m, xi_p, xi_m, kappa, chi


def printed_local_elements(rho0: np.ndarray, params: EngineParams, t: float) -> dict:
    """Evaluate the printed local closed forms exactly as typeset."""
    r = local_rates(params)
    ap, bp, bm = r.gamma_a_plus, r.gamma_b_plus, r.gamma_b_minus
    eta_p, eta_m, xi_p, xi_m, kappa, chi = _eta_xi_kappa_chi(r, t)
    s = eta_p + eta_m
    decay_b = math.exp(-t * (bp + bm))
    odd = (bp + 1) / bp  # mixed-unit term, kept verbatim
    frac_b = bp / (bp + bm)
    p0 = np.asarray(rho0, dtype=complex)
    r11, r22, r33, r44 = (p0[k, k] for k in range(4))

    e11 = ((xi_p / s + odd + ap * decay_b / (bm + ap)) * r11 + kappa / s * r33
           + (odd - bp * decay_b / (bm + bp)) * r22)
    e22 = ((xi_p / s + frac_b + ap * decay_b / (bm + ap)) * r22 + kappa / s * r44
           + (frac_b - ap * decay_b / (bm + ap)) * r11)
    e33 = ((xi_m / s + odd + ap * decay_b / (bm + ap)) * r33 + chi / s * r11
           + (odd - bp * decay_b / (bm + bp)) * r44)
    e44 = ((xi_m / s + frac_b + ap * decay_b / (bm + ap)) * r44 + chi / s * r22
           + (frac_b - ap * decay_b / (bm + ap)) * r33)
    e23 = math.exp(-0.5 * r.total * t) * p0[1, 2]
    return {(0, 0): e11, (1, 1): e22, (2, 2): e33, (3, 3): e44, (1, 2): e23}


def lme_printed_closed_form(rho0: np.ndarray, params: EngineParams, t: float, *,
                          hamiltonian: bool = False) -> ClosedFormReport:
    """Printed local solution next to the exact propagator; never asserts.

    The printed forms carry no coherent evolution, so the reference uses the
    dissipator-only generator unless ``hamiltonian`` is set.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        elements = printed_local_elements(rho0, params, t)
    printed = np.zeros((4, 4), dtype=complex)
    for (i, j), v in elements.items():
        printed[i, j] = v
        printed[j, i] = np.conj(v)
    reference = lme_propagate(rho0, params, t, hamiltonian=hamiltonian)
    with np.errstate(invalid="ignore"):
        deviation = {k: float(abs(v - reference[k])) for k, v in elements.items()}
    notes = (
        "radicand of eta uses 6*gA-*gA- as printed",
        "(gB+ + 1)/gB+ terms mix units and are evaluated verbatim",
    )
    return ClosedFormReport(t, printed, reference, elements, deviation, notes)


def printed_local_derivatives(rho: np.ndarray, params: EngineParams) -> dict:
    """Right-hand sides of the printed element-wise local equations of motion."""
    r = local_rates(params)
    ap, am, bp, bm = r.gamma_a_plus, r.gamma_a_minus, r.gamma_b_plus, r.gamma_b_minus
    p = np.asarray(rho, dtype=complex)
    half = 0.5 * r.total
    return {
        (0, 0): -(ap + am + bp) * p[0, 0] + bp * p[1, 1] + am * p[2, 2],
        (1, 1): bp * p[0, 0] + am * p[3, 3] + (am + ap + bm) * p[1, 1],
        (2, 2): ap * p[0, 0] - bp * p[2, 2] - bm * p[3, 3],
        (3, 3): ap * p[1, 1] + bp * p[2, 2] - bm * p[3, 3],
        (1, 2): half * p[1, 2],
        (0, 1): -half * p[0, 1] + am * p[2, 3],
        (0, 2): -0.5 * (ap + am + 2 * bp) * p[0, 2] + bm * p[1, 3],
        (0, 3): half * p[0, 3],
        (1, 3): -0.5 * (ap + am + 2 * bm) * p[1, 3] + bp * p[0, 2],
        (2, 3): -0.5 * (bp + bm) * p[2, 3] + ap * p[0, 1],
    }


def eom_discrepancy(rho: np.ndarray, params: EngineParams) -> dict:
    """``|printed - dissipator|`` for each printed local equation of motion."""
    exact = lme_generator(params, hamiltonian=False).apply(rho)
    return {k: float(abs(v - exact[k])) for k, v in printed_local_derivatives(rho, params).items()}
