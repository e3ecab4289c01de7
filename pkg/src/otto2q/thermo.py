"""Heat, work and operating regimes of the two-qubit Otto cycle.

Sign convention: every heat is positive when it flows *into* the system,
and the work is ``W = Qc + Qh``. Regimes follow the sign table

==========================  ======  ======  ======
regime                      Qc      Qh      W
==========================  ======  ======  ======
Engine                      < 0     > 0     < 0
Refrigerator                > 0     < 0     > 0
Dissipator                  > 0     > 0     ~ 0
HeatPumpOrAccelerator       < 0     > 0     > 0
==========================  ======  ======  ======

with every inequality taken beyond a tolerance ``eps``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import expm

from . import core, gme, lme
from .core import EngineParams, ParameterError
from .oracle import IntegrationError
from .superop import AffineGenerator, vec

DESCRIPTIONS = ("local", "global")
SCHEDULES = ("split", "single")
INTEGRATORS = ("exact", "trapezoid")

# global-description defaults; see the README for the reasoning
GLOBAL_DEFAULTS = {"operators": "printed", "absorption": True}


class Regime(str, enum.Enum):
    ENGINE = "Engine"
    REFRIGERATOR = "Refrigerator"
    DISSIPATOR = "Dissipator"
    HEAT_PUMP_OR_ACCELERATOR = "HeatPumpOrAccelerator"
    NON_FUNCTIONING = "NonFunctioning"

    def __str__(self) -> str:
        return self.value


def default_eps(params: EngineParams) -> float:
    return 1e-6 * max(params.omega_a, params.omega_b)


def make_generator(params: EngineParams, description: str = "global", *,
                   hamiltonian: bool = True, **options) -> AffineGenerator:
    """Generator for either description with named ``hot``/``cold`` parts.

    Extra keyword options (``operators``, ``absorption``, ``rates``) apply
    to the global description only.
    """
    if description == "local":
        return lme.lme_generator(params, hamiltonian=hamiltonian)
    if description == "global":
        return gme.gme_generator(params, hamiltonian=hamiltonian, **{**GLOBAL_DEFAULTS, **options})
    raise ParameterError(f"description must be one of {DESCRIPTIONS}, got {description!r}")


def _energy_row(h: np.ndarray) -> np.ndarray:
    # tr(H X) = vec(H^T) . vec(X)
    return vec(np.asarray(h).T)


def heat_current(rho: np.ndarray, generator: AffineGenerator, h: np.ndarray, bath: str) -> float:
    """``tr(H L_bath[rho])``; the imaginary part is checked, then dropped."""
    val = complex(_energy_row(h) @ (generator.part(bath) @ vec(rho)))
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise ParameterError(f"heat current has imaginary part {val.imag:.3e}")
    return val.real


def heat_current_hot(rho, params: EngineParams, description: str = "global", **options) -> float:
    gen = make_generator(params, description, **options)
    return heat_current(rho, gen, core.build_hamiltonian(params), "hot")


def heat_current_cold(rho, params: EngineParams, description: str = "global", **options) -> float:
    gen = make_generator(params, description, **options)
    return heat_current(rho, gen, core.build_hamiltonian(params), "cold")


def work_rate(rho, params: EngineParams, description: str = "global", **options) -> float:
    """``tr(H (L_A + L_B)[rho])``, evaluated directly from the summed dissipators."""
    gen = make_generator(params, description, **options)
    h = core.build_hamiltonian(params)
    total = gen.part("hot") + gen.part("cold")
    return complex(_energy_row(h) @ (total @ vec(rho))).real


def classify_regime(qc: float, qh: float, w: float, eps: float = 1e-6) -> Regime:
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if qc < -eps and qh > eps and w < -eps:
        return Regime.ENGINE
    if qc > eps and qh < -eps and w > eps:
        return Regime.REFRIGERATOR
    if qc > eps and qh > eps and abs(w) <= eps:
        return Regime.DISSIPATOR
    if qc < -eps and qh > eps and w > eps:
        return Regime.HEAT_PUMP_OR_ACCELERATOR
    return Regime.NON_FUNCTIONING


def efficiency(qc: float, qh: float, regime: Optional[Regime] = None, *,
               eps: float = 1e-6) -> Optional[float]:
    """``1 + Qc/Qh`` for Engine points, ``None`` otherwise or when ``Qh == 0``.

    Pass ``regime=False`` to skip the Engine requirement and get the raw ratio.
    """
    if qh == 0:
        return None
    if regime is None:
        regime = classify_regime(qc, qh, qc + qh, eps)
    if regime is not False and regime != Regime.ENGINE:
        return None
    return 1.0 + qc / qh


def cop(qc: float, qh: float, regime: Optional[Regime] = None, *,
        eps: float = 1e-6) -> Optional[float]:
    """``Qc / |Qc + Qh|`` for Refrigerator points, ``None`` otherwise."""
    w = qc + qh
    if w == 0:
        return None
    if regime is None:
        regime = classify_regime(qc, qh, w, eps)
    if regime is not False and regime != Regime.REFRIGERATOR:
        return None
    return qc / abs(w)


def carnot_bounds(t_c: float, t_h: float) -> tuple[float, float]:
    """``(1 - Tc/Th, Tc/(Th - Tc))``; the COP bound diverges as ``Tc -> Th``."""
    if not t_h > t_c > 0:
        raise ParameterError("need Th > Tc > 0")
    return 1.0 - t_c / t_h, t_c / (t_h - t_c)


def power(work: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Finite-difference ``dW/dt`` (second order inside, first order at the ends)."""
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        return np.zeros_like(np.asarray(work, dtype=float))
    if np.any(np.diff(times) <= 0):
        raise ParameterError("time grid must be strictly increasing")
    return np.gradient(np.asarray(work, dtype=float), times)


@dataclass(frozen=True)
class ThermoRecord:
    t: float
    Qc: float
    Qh: float
    W: float
    P: float
    eta: Optional[float]
    cop: Optional[float]
    regime: Regime


@dataclass
class CycleResult:
    """Accumulated heats on a uniform time grid plus derived quantities."""

    t: np.ndarray
    Qc: np.ndarray
    Qh: np.ndarray
    W: np.ndarray
    P: np.ndarray
    eta: list
    cop: list
    regime: list
    dt: float
    error_estimate: float = 0.0
    settings: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def record(self, k: int) -> ThermoRecord:
        return ThermoRecord(float(self.t[k]), float(self.Qc[k]), float(self.Qh[k]), float(self.W[k]),
                            float(self.P[k]), self.eta[k], self.cop[k], self.regime[k])

    def records(self):
        return [self.record(k) for k in range(len(self))]

    def at(self, t: float) -> ThermoRecord:
        k = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ParameterError(f"t={t} is not on the grid")
        return self.record(k)


def _grid(tmax: float, dt: float) -> int:
    if tmax <= 0 or dt <= 0:
        raise ParameterError("tmax and dt must be positive")
    n = int(round(tmax / dt))
    if n < 1 or abs(n * dt - tmax) > 1e-9 * tmax:
        raise ParameterError("tmax must be a multiple of dt")
    return n


def accumulated_heat_exact(generator: AffineGenerator, h: np.ndarray, rho0: np.ndarray,
                           bath: str, n: int, dt: float) -> np.ndarray:
    """``int_0^t tr(H L_bath[rho(s)]) ds`` on ``t = k dt`` without quadrature error.

    One exponential of the block matrix ``[[L, 0], [1, 0]]`` yields both the
    step propagator and its time integral.
    """
    d = generator.matrix.shape[0]
    block = np.zeros((2 * d, 2 * d), dtype=complex)
    block[:d, :d] = generator.matrix
    block[d:, :d] = np.eye(d)
    e = expm(block * dt)
    prop, integral = e[:d, :d], e[d:, :d]
    row = _energy_row(h) @ generator.part(bath)
    v = vec(rho0)
    out = np.zeros(n + 1)
    acc = 0.0
    for k in range(1, n + 1):
        acc += complex(row @ (integral @ v)).real
        out[k] = acc
        v = prop @ v
    return out


def _currents(generator: AffineGenerator, h: np.ndarray, rho0: np.ndarray, bath: str,
              n: int, dt: float) -> np.ndarray:
    prop = expm(generator.matrix * dt)
    row = _energy_row(h) @ generator.part(bath)
    v = vec(rho0)
    out = np.empty(n + 1)
    for k in range(n + 1):
        out[k] = complex(row @ v).real
        v = prop @ v
    return out


def accumulated_heat_trapezoid(generator: AffineGenerator, h: np.ndarray, rho0: np.ndarray,
                               bath: str, n: int, dt: float, *, tol: float = 1e-6,
                               max_halvings: int = 8) -> tuple[np.ndarray, float, int]:
    """Trapezoidal integral with a Richardson error estimate.

    The step is halved until ``|I(dt/2) - I(dt)| / 3 <= tol``. Returns the
    integral sampled on the requested grid, the final estimate and the
    number of sub-steps per grid interval.
    """
    sub = 1
    coarse = cumulative_trapezoid(_currents(generator, h, rho0, bath, n, dt), dx=dt, initial=0.0)
    for _ in range(max_halvings):
        sub *= 2
        fine_full = cumulative_trapezoid(_currents(generator, h, rho0, bath, n * sub, dt / sub),
                                         dx=dt / sub, initial=0.0)
        fine = fine_full[::sub]
        err = float(np.max(np.abs(fine - coarse)) / 3)
        if err <= tol:
            return fine, err, sub
        coarse = fine
    raise IntegrationError(f"trapezoid error estimate {err:.2e} exceeds {tol:.0e}")


def cycle_initial_states(params: EngineParams, schedule: str = "split") -> tuple[np.ndarray, np.ndarray]:
    """Initial states for the hot-contact and cold-contact trajectories."""
    phi = core.initial_state_phi(params.p)
    if schedule == "split":
        return phi, core.initial_state_psi(params.theta)
    if schedule == "single":
        return phi, phi
    raise ParameterError(f"schedule must be one of {SCHEDULES}, got {schedule!r}")


def integrate_cycle(params: EngineParams, description: str = "global", tmax: float = 3.0,
                    dt: float = 0.01, *, schedule: str = "split", integrator: str = "exact",
                    eps: Optional[float] = None, tol: float = 1e-6,
                    generator: Optional[AffineGenerator] = None, **options) -> CycleResult:
    """Accumulated heats, work, power, efficiency, COP and regime versus time.

    ``schedule="split"`` takes the hot heat from the trajectory starting in
    ``phi(p)`` and the cold heat from the one starting in ``psi(theta)``;
    ``"single"`` uses ``phi(p)`` for both. Both trajectories evolve under the
    full generator. ``integrator="exact"`` integrates each step in closed
    form; ``"trapezoid"`` uses quadrature with step refinement to ``tol``.
    """
    n = _grid(tmax, dt)
    if generator is None:
        generator = make_generator(params, description, **options)
    h = core.build_hamiltonian(params)
    rho_h, rho_c = cycle_initial_states(params, schedule)
    err = 0.0
    if integrator == "exact":
        qh = accumulated_heat_exact(generator, h, rho_h, "hot", n, dt)
        qc = accumulated_heat_exact(generator, h, rho_c, "cold", n, dt)
    elif integrator == "trapezoid":
        qh, e1, _ = accumulated_heat_trapezoid(generator, h, rho_h, "hot", n, dt, tol=tol)
        qc, e2, _ = accumulated_heat_trapezoid(generator, h, rho_c, "cold", n, dt, tol=tol)
        err = max(e1, e2)
    else:
        raise ParameterError(f"integrator must be one of {INTEGRATORS}")
    t = np.arange(n + 1) * dt
    w = qc + qh
    eps = default_eps(params) if eps is None else eps
    regimes = [classify_regime(a, b, c, eps) for a, b, c in zip(qc, qh, w)]
    etas = [efficiency(a, b, r) for a, b, r in zip(qc, qh, regimes)]
    cops = [cop(a, b, r) for a, b, r in zip(qc, qh, regimes)]
    settings = {"description": description, "schedule": schedule, "integrator": integrator, **options}
    return CycleResult(t, qc, qh, w, power(w, t), etas, cops, regimes, dt, err, settings)


# ---------------------------------------------------------------------------
# printed closed-form heats

@dataclass(frozen=True)
class HeatReport:
    t: float
    printed: tuple  # (Qh, Qc)
    reference: tuple
    notes: tuple = ()

    @property
    def deviation(self) -> tuple:
        return tuple(abs(a - b) for a, b in zip(self.printed, self.reference))

    @property
    def max_deviation(self) -> float:
        vals = [v for v in self.deviation if math.isfinite(v)]
        return max(vals) if vals else float("nan")


def printed_local_heats(params: EngineParams, t: float) -> tuple[float, float]:
    """Printed local-description heats for ``p = 1``, evaluated as typeset."""
    r = lme.local_rates(params)
    th = params.theta
    c, s = math.cos(th), math.sin(th)
    g, wa, wb = params.g, params.omega_a, params.omega_b
    with np.errstate(over="ignore", invalid="ignore"):
        eta_p, eta_m, xi_p, xi_m, kappa, _ = lme._eta_xi_kappa_chi(r, t)
        norm = eta_p + eta_m
        ga = r.gamma_a_plus + r.gamma_a_minus
        gb = r.gamma_b_plus + r.gamma_b_minus
        eb = np.exp(t * gb)
        qh = (g * c * s * np.exp(ga * t / 2) + wa * xi_p / norm * (c**2 - 1)
              + wb * s**2 * xi_m / norm + (wa + wb) * kappa / norm * s**2)
        qc = (-c * s * g * np.exp(gb * t / 2)
              + (r.gamma_b_plus + r.gamma_b_minus * eb) / gb * wa * (1 - c**2)
              - wb * (r.gamma_b_minus / gb + eb / (gb + 1)) * s**2
              + r.gamma_b_minus * (1 - c**2) / gb * (1 - eb) * (wa + wb))
    return float(qh), float(qc)


def printed_global_heats(params: EngineParams, p: float, t: float,
                         rates: Optional[gme.GlobalRates] = None) -> tuple[float, float]:
    """Printed global-description heats; the undefined ``d`` in one exponent is read as 1."""
    if not 0 <= p <= 1:
        raise ParameterError("p must lie in [0, 1]")
    if rates is None:
        rates = gme.gme_rates(params, absorption=False)
    th = params.theta
    c, s = math.cos(th), math.sin(th)
    g, wa, wb = params.g, params.omega_a, params.omega_b
    root = math.sqrt(p * (1 - p))
    eh = math.exp(-rates.delta_plus * t / 2)
    ec = math.exp(-rates.Omega_plus * t / 2)
    qh = g * (c * s * eh - root) + wa * (eh * c**2 - p) + wb * (eh * s**2 - (1 - p))
    qc = -g * (c * s * ec - root) + wa * (p - ec * c**2) - wb * (ec * s**2 - (1 - p))
    return qh, qc


def closed_form_heats_local(params: EngineParams, t: float, *, reference: Optional[CycleResult] = None,
                            **cycle_options) -> HeatReport:
    """Printed local heats next to the integrated ones; never asserts."""
    if params.p != 1:
        raise ParameterError("the printed local heats hold for p = 1 only")
    printed = printed_local_heats(params, t)
    ref = _reference_heats(params, "local", t, reference, cycle_options)
    notes = ("exponents grow with t as printed", "radicand of eta uses 6*gA-*gA- as printed")
    return HeatReport(t, printed, ref, notes)


def closed_form_heats_global(params: EngineParams, p: float, t: float, *,
                             reference: Optional[CycleResult] = None, **cycle_options) -> HeatReport:
    printed = printed_global_heats(params, p, t)
    ref = _reference_heats(params.with_(p=p), "global", t, reference, cycle_options)
    return HeatReport(t, printed, ref, ("cold exponent denominator 'd*2' read as 2",))


def _reference_heats(params, description, t, reference, options):
    if t == 0:
        return 0.0, 0.0
    if reference is None:
        dt = options.pop("dt", t / max(1, int(round(t / 0.01))))
        reference = integrate_cycle(params, description, t, dt, **options)
    rec = reference.at(t)
    return rec.Qh, rec.Qc


# ---------------------------------------------------------------------------
# work from coherence injected into a bosonic bath

@dataclass(frozen=True)
class BosonicMode:
    cutoff: int
    omega: float = 1.0

    def __post_init__(self):
        if self.cutoff < 2:
            raise ParameterError("cutoff must be at least 2")
        if self.omega <= 0:
            raise ParameterError("omega must be positive")

    @property
    def a(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.cutoff)), 1).astype(complex)

    @property
    def adag(self) -> np.ndarray:
        return self.a.conj().T

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.omega * self.adag @ self.a

    def doubled(self) -> "BosonicMode":
        return BosonicMode(2 * self.cutoff, self.omega)


COUPLINGS = {
    "longitudinal": (0.0, 0.0, 1.0),
    "transverse": (1.0, 1.0, 0.0),
}


def effective_bath_operator(rho_s: np.ndarray, mode: BosonicMode, c: tuple, qubit: str = "A",
                            gamma: float = 1.0) -> tuple[np.ndarray, complex]:
    """``G = Tr_qubit[H_D rho_S]`` for ``H_D = sqrt(gamma) (c.sigma) x (b - b^dag)``.

    Returns the bath operator and the scalar ``sqrt(gamma) <c.sigma>``.
    """
    reduced = core.partial_trace(rho_s, qubit)
    cs = c[0] * core.SIGMA_X + c[1] * core.SIGMA_Y + c[2] * core.SIGMA_Z
    amp = math.sqrt(gamma) * complex(np.trace(cs @ reduced))
    return amp * (mode.a - mode.adag), amp


@dataclass(frozen=True)
class BathCoherenceResult:
    value: complex
    value_doubled: complex
    correction_amplitude: complex
    cutoff: int
    tol: float = 1e-6

    @property
    def delta(self) -> float:
        return abs(self.value_doubled - self.value)

    @property
    def converged(self) -> bool:
        return self.delta <= self.tol * max(1.0, abs(self.value))

    @property
    def correction_vanishes(self) -> bool:
        """Whether the effective Hamiltonian correction is zero (to 1e-12)."""
        return abs(self.correction_amplitude) < 1e-12


def _coherence_work(g_r, mode, lam, tau, beta, c1, c2):
    xi = c1 * mode.a + c2 * mode.adag
    h_r = mode.hamiltonian
    comm = g_r @ h_r - h_r @ g_r
    return -1j * lam * beta * tau * complex(np.trace(comm @ xi))


def bath_coherence_work(coupling: str, mode: BosonicMode, lam: float, tau: float, beta: float,
                        rho_s: np.ndarray, *, qubit: str = "A", gamma: float = 1.0,
                        c: Optional[tuple] = None, c1: complex = 1.0,
                        c2: Optional[complex] = None) -> BathCoherenceResult:
    """``-i lam beta tau Tr([G, H_R] xi)`` with ``xi = c1 a + c2 a^dag``.

    ``c2`` defaults to ``conj(c1)`` so that ``xi`` is Hermitian. The value is
    computed at cutoffs ``N`` and ``2N``; the result reports both.
    """
    if mode.cutoff < 8:
        raise ParameterError("cutoff must be at least 8")
    if c is None:
        if coupling not in COUPLINGS:
            raise ParameterError(f"coupling must be one of {tuple(COUPLINGS)}")
        c = COUPLINGS[coupling]
    c2 = np.conj(c1) if c2 is None else c2
    values = []
    amp = 0j
    for m in (mode, mode.doubled()):
        g_r, amp = effective_bath_operator(rho_s, m, c, qubit, gamma)
        values.append(_coherence_work(g_r, m, lam, tau, beta, c1, c2))
    return BathCoherenceResult(values[0], values[1], amp, mode.cutoff)


# ---------------------------------------------------------------------------
# sweeps

@dataclass
class RegimeMap:
    p: np.ndarray
    t: np.ndarray
    Qc: np.ndarray  # shape (len(p), len(t))
    Qh: np.ndarray
    regime: np.ndarray  # object array of Regime

    @property
    def W(self) -> np.ndarray:
        return self.Qc + self.Qh

    def fraction(self, label: Regime, p_mask, t_mask) -> float:
        sub = self.regime[np.ix_(p_mask, t_mask)]
        return float(np.mean(sub == label)) if sub.size else float("nan")


def regime_map(params: EngineParams, ps, tmax: float, dt: float, description: str = "global",
               **cycle_options) -> RegimeMap:
    """Classify every ``(p, t)`` cell; the generator is built once."""
    ps = np.asarray(ps, dtype=float)
    opts = dict(cycle_options)
    gen_opts = {k: opts.pop(k) for k in ("operators", "absorption", "hamiltonian", "rates") if k in opts}
    gen = make_generator(params, description, **gen_opts)
    rows = [integrate_cycle(params.with_(p=float(p)), description, tmax, dt, generator=gen, **opts)
            for p in ps]
    t = rows[0].t
    stack = lambda name: np.array([getattr(r, name) for r in rows])
    regimes = np.array([r.regime for r in rows], dtype=object)
    return RegimeMap(ps, t, stack("Qc"), stack("Qh"), regimes)
