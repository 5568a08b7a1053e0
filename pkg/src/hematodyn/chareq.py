"""Characteristic equation lambda + A(tau) - B(tau) exp(-lambda tau) = 0 at E*.

Coefficients and their delay derivatives, the trivial-state dominant root,
the admissibility threshold tau*, the Z_k crossing functions and the
stability chart assembled from their roots.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError, NoPositiveSteadyState
from .model import (
    HillBeta,
    ModelParams,
    _bisect_inverse,
    existence_threshold_tau_bar,
    positive_exists,
    steady_positive,
)

DEFAULT_GRID = 2000
DEFAULT_ROOT_TOL = 1e-8
SIGN_ZERO_TOL = 1e-12
TOUCH_TOL = 1e-6


@dataclass(frozen=True)
class CharCoeffs:
    tau: float
    A: float
    B: float
    Aprime: float
    Bprime: float


def coeffs_at(params: ModelParams, tau: float, closed_form: bool | None = None) -> CharCoeffs:
    """A, B and their tau-derivatives at delay ``tau``.

    Hill rates use closed forms unless ``closed_form=False``; any other rate
    goes through S*(tau) and implicit differentiation of the steady-state
    equation.
    """
    p = params.with_tau(tau)
    if not positive_exists(p):
        raise NoPositiveSteadyState(f"no positive steady state at tau={tau}")
    d = p.delta
    e = p.survival
    q = p.net_factor
    beta = p.beta
    if isinstance(beta, HillBeta) and closed_form is not False:
        b0, n = beta.beta0, beta.n
        A = 2 * d * e / q
        B = (2 * d * b0 * e - n * d * (q * b0 - d)) / (q * b0)
        Ap = 2 * d * d * e / q**2
        Bp = 2 * d * d * e * (b0 + n * d) / (q**2 * b0)
        return CharCoeffs(tau, A, B, Ap, Bp)

    S = steady_positive(p, closed_form=False).S
    b = beta.value(S)
    bp = beta.derivative(S)
    bpp = beta.second_derivative(S)
    dS = 2 * d * e * b / (q * bp)
    dq = -2 * d * e
    A = d + b
    B = A + q * S * bp
    Ap = bp * dS
    Bp = Ap + dq * S * bp + q * (bp + S * bpp) * dS
    return CharCoeffs(tau, A, B, Ap, Bp)


# -- trivial steady state ----------------------------------------------------


class TrivialStability(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    CRITICAL = "Critical"


def trivial_dominant_root(params: ModelParams) -> float:
    """Unique real root of lambda + delta + b0 - 2 b0 exp(-delta tau) exp(-lambda tau)."""
    d, tau, b0 = params.delta, params.tau, params.beta.at_zero
    if tau == 0:
        return b0 - d
    if b0 == 0:
        return -d

    def f(lam):
        return lam + d + b0 - 2 * b0 * math.exp(-(d + lam) * tau)

    # f(-(d+b0)) < 0 and f(b0) >= d > 0
    return optimize.bisect(f, -(d + b0), b0, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=500)


def trivial_stability(params: ModelParams) -> TrivialStability:
    gap = params.net_factor * params.beta.at_zero - params.delta
    if abs(gap) <= 1e-12:
        return TrivialStability.CRITICAL
    return TrivialStability.STABLE if gap < 0 else TrivialStability.UNSTABLE


# -- admissibility of imaginary roots ----------------------------------------


@dataclass(frozen=True)
class HypothesesReport:
    h2_holds: bool
    h1_holds_on_grid: bool
    chi_at_beta_inv_delta: float
    tau_star: float | None


def check_hypotheses(params: ModelParams, grid: int = 1000) -> HypothesesReport:
    beta, d = params.beta, params.delta
    if not d < beta.at_zero:
        raise DomainError("hypotheses need delta < beta(0)")
    y_end = beta.inverse(d)
    chi_end = beta.chi(y_end)
    chis = np.array([beta.chi(y) for y in np.linspace(0.0, y_end, grid)])
    return HypothesesReport(
        h2_holds=chi_end < -4 * d,
        h1_holds_on_grid=bool(np.all(np.diff(chis) <= 0)),
        chi_at_beta_inv_delta=chi_end,
        tau_star=tau_star(params),
    )


def tau_star(params: ModelParams, closed_form: bool | None = None, grid: int = 1000) -> float | None:
    """Delay below which A(tau) < |B(tau)| with B(tau) < 0, or None."""
    beta, d = params.beta, params.delta
    if not d < beta.at_zero:
        return None
    if isinstance(beta, HillBeta) and closed_form is not False:
        b0, n = beta.beta0, beta.n
        if not n > 4 * b0 / (b0 - d):
            return None
        return math.log(2 * b0 * (n - 2) / (n * (b0 + d))) / d

    b0 = beta.at_zero
    tau_bar = existence_threshold_tau_bar(params)

    def gap(tau):
        e = math.exp(-d * tau)
        q = 2 * e - 1
        x = min(d / q, b0)
        f1 = beta.chi(_bisect_inverse(beta, x))
        f2 = -4 * d * e / q**2
        return f1 - f2

    if gap(0.0) >= 0:
        return None
    taus = np.linspace(0.0, tau_bar * (1 - 1e-9), grid)
    prev = taus[0]
    for t in taus[1:]:
        if gap(t) >= 0:
            return optimize.bisect(gap, prev, t, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        prev = t
    return None


def omega_at(params: ModelParams, tau: float) -> float | None:
    """Crossing frequency sqrt(B^2 - A^2), or None where A >= |B| or B >= 0."""
    if not positive_exists(params.with_tau(tau)):
        return None
    c = coeffs_at(params, tau)
    return _omega(c)


def _omega(c: CharCoeffs) -> float | None:
    if c.B < 0 and -c.B > c.A:
        return math.sqrt(c.B * c.B - c.A * c.A)
    return None


def _z_from_coeffs(c: CharCoeffs, k: int) -> float:
    w = _omega(c)
    if w is None:
        raise DomainError(f"Z_k undefined at tau={c.tau}: no admissible frequency")
    ratio = min(1.0, max(-1.0, c.A / c.B))
    return c.tau - (math.acos(ratio) + 2 * k * math.pi) / w


def z_k(params: ModelParams, k: int, tau: float) -> float:
    """Z_k(tau) = tau - (arccos(A/B) + 2 k pi) / sqrt(B^2 - A^2)."""
    if k < 0:
        raise DomainError("branch index must be >= 0")
    if not positive_exists(params.with_tau(tau)):
        raise DomainError(f"Z_k undefined at tau={tau}")
    return _z_from_coeffs(coeffs_at(params, tau), k)


def transversality_sign(coeffs: CharCoeffs) -> tuple[int, float]:
    """Sign of d Re(lambda)/d tau at a crossing, with the raw expression value."""
    A, B, Ap, Bp, tc = coeffs.A, coeffs.B, coeffs.Aprime, coeffs.Bprime, coeffs.tau
    expr = B * (A * A + Ap + A * Ap * tc) - B**3 - B * B * Bp * tc - Bp * A
    if abs(expr) < SIGN_ZERO_TOL:
        return 0, expr
    return (1 if expr > 0 else -1), expr


@dataclass(frozen=True)
class CrossingPoint:
    k: int
    tau_c: float
    omega: float
    trans_sign: int
    expr_value: float


def scan_grid(t_star: float, grid: int) -> np.ndarray:
    """Uniform scan grid on [0, tau* - eps] with eps = 1e-6 tau*."""
    return np.linspace(0.0, t_star * (1 - 1e-6), grid)


def _crossing(params: ModelParams, k: int, tau_c: float, tangential: bool = False) -> CrossingPoint:
    c = coeffs_at(params, tau_c)
    sign, expr = transversality_sign(c)
    if tangential:
        sign = 0
    return CrossingPoint(k, tau_c, _omega(c), sign, expr)


def _branch_roots(params, k, taus, coeffs, root_tol):
    z = np.array([_z_from_coeffs(c, k) for c in coeffs])
    f = lambda t: z_k(params, k, t)
    out = []
    for i in range(len(taus) - 1):
        if z[i] == 0.0:
            out.append(_crossing(params, k, taus[i]))
        elif z[i] * z[i + 1] < 0:
            root = optimize.bisect(f, taus[i], taus[i + 1], xtol=root_tol, maxiter=200)
            out.append(_crossing(params, k, root))
    # sign touches: negative local maxima within TOUCH_TOL of zero
    for i in range(1, len(taus) - 1):
        if -1e-2 < z[i] < 0 and z[i] >= z[i - 1] and z[i] >= z[i + 1]:
            res = optimize.minimize_scalar(
                lambda t: -f(t), bounds=(taus[i - 1], taus[i + 1]), method="bounded",
                options={"xatol": root_tol},
            )
            if abs(res.fun) < TOUCH_TOL:
                warnings.warn(
                    f"tangential root of Z_{k} near tau={res.x:.6g}; not counted as a switch",
                    RuntimeWarning,
                    stacklevel=3,
                )
                out.append(_crossing(params, k, float(res.x), tangential=True))
    return out


def find_crossings(
    params: ModelParams,
    grid: int = DEFAULT_GRID,
    root_tol: float = DEFAULT_ROOT_TOL,
    k_max: int = 50,
) -> list[CrossingPoint]:
    """Roots of every Z_k on [0, tau*), sorted by delay.

    Branches are scanned in increasing k; the scan stops after the first
    root-free branch plus one extra branch, since Z_{k+1} < Z_k.
    """
    if grid < 100:
        raise DomainError("grid must be >= 100")
    t_star = tau_star(params)
    if t_star is None:
        return []
    taus = scan_grid(t_star, grid)
    coeffs = [coeffs_at(params, t) for t in taus]
    found: list[CrossingPoint] = []
    empty_run = 0
    for k in range(k_max + 1):
        roots = _branch_roots(params, k, taus, coeffs, root_tol)
        found.extend(roots)
        empty_run = empty_run + 1 if not roots else 0
        if empty_run >= 2:
            break
    return sorted(found, key=lambda c: c.tau_c)


# -- stability chart ---------------------------------------------------------


class Region(str, enum.Enum):
    TRIVIAL_ONLY_STABLE = "TrivialOnlyStable"
    POSITIVE_STABLE = "PositiveStable"
    POSITIVE_UNSTABLE = "PositiveUnstable"


@dataclass(frozen=True)
class ChartInterval:
    lo: float
    hi: float
    region: Region
    unstable_pairs: int


@dataclass
class StabilityChart:
    tau_bar: float | None
    tau_star: float | None
    crossings: list[CrossingPoint] = field(default_factory=list)
    intervals: list[ChartInterval] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        """True when no delay admits a positive steady state."""
        return self.tau_bar is None

    def region_at(self, tau: float) -> Region:
        for iv in self.intervals:
            if iv.lo <= tau < iv.hi:
                return iv.region
        return self.intervals[-1].region


def build_chart(
    params: ModelParams,
    tau_max: float,
    grid: int = DEFAULT_GRID,
    root_tol: float = DEFAULT_ROOT_TOL,
    k_max: int = 50,
) -> StabilityChart:
    """Partition [0, tau_max] by the stability of E*.

    E* is stable at tau = 0; each transversal crossing changes the number of
    unstable root pairs by its sign. Beyond tau_bar only E0 exists and it is
    globally stable. When delta >= beta(0) the chart is a single
    TrivialOnlyStable interval and ``degenerate`` is True.
    """
    if not tau_max > 0:
        raise DomainError("tau_max must be > 0")
    t_bar = existence_threshold_tau_bar(params)
    if t_bar is None:
        iv = ChartInterval(0.0, tau_max, Region.TRIVIAL_ONLY_STABLE, 0)
        return StabilityChart(None, None, [], [iv])

    crossings = find_crossings(params, grid=grid, root_tol=root_tol, k_max=k_max)
    intervals = []
    lo, count = 0.0, 0
    end = min(tau_max, t_bar)
    for c in crossings:
        if c.trans_sign == 0 or c.tau_c >= end:
            continue
        intervals.append(_interval(lo, c.tau_c, count))
        lo, count = c.tau_c, max(count + c.trans_sign, 0)
    intervals.append(_interval(lo, end, count))
    if tau_max > t_bar:
        intervals.append(ChartInterval(t_bar, tau_max, Region.TRIVIAL_ONLY_STABLE, 0))
    return StabilityChart(t_bar, tau_star(params), crossings, intervals)


def _interval(lo, hi, count):
    region = Region.POSITIVE_STABLE if count == 0 else Region.POSITIVE_UNSTABLE
    return ChartInterval(lo, hi, region, count)
