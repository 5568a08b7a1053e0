"""Stem-cell population model: introduction rate, parameters, vector field, steady states.

The state is the pair (S, N): total stem-cell population and nonproliferating
population. Both compartments die at rate ``delta`` and a proliferative phase
lasts ``tau`` days.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import DomainError

BISECT_RTOL = 1e-12
# Roundoff negativity tolerated (and clamped) before evaluating beta.
CLAMP_TOL = 1e-12


class BetaRate:
    """Decreasing introduction rate S -> beta(S) with its derivative.

    Subclasses provide ``value`` and ``derivative``. ``inverse`` falls back to
    bracketed bisection, which is valid because beta is strictly decreasing.
    """

    def value(self, S: float) -> float:
        raise NotImplementedError

    def derivative(self, S: float) -> float:
        raise NotImplementedError

    def __call__(self, S: float) -> float:
        return self.value(S)

    @property
    def at_zero(self) -> float:
        return self.value(0.0)

    def inverse(self, x: float) -> float:
        return _bisect_inverse(self, x)

    def chi(self, y: float) -> float:
        """y * beta'(y)."""
        return y * self.derivative(y)

    def second_derivative(self, S: float) -> float:
        # central difference of the exact first derivative; subclasses override
        h = 1e-5 * max(1.0, abs(S))
        lo = max(S - h, 0.0)
        return (self.derivative(S + h) - self.derivative(lo)) / (S + h - lo)


@dataclass(frozen=True)
class HillBeta(BetaRate):
    """beta(S) = beta0 * theta**n / (theta**n + S**n)."""

    beta0: float
    theta: float = 1.0
    n: float = 12.0

    def __post_init__(self):
        if not self.beta0 >= 0:
            raise DomainError(f"beta0 must be >= 0, got {self.beta0}")
        if not self.theta > 0:
            raise DomainError(f"theta must be > 0, got {self.theta}")
        if not self.n > 1:
            raise DomainError(f"n must be > 1, got {self.n}")

    def value(self, S: float) -> float:
        return self.beta0 / (1.0 + (S / self.theta) ** self.n)

    def derivative(self, S: float) -> float:
        r = S / self.theta
        rn = r**self.n
        return -self.beta0 * self.n * rn / (S * (1.0 + rn) ** 2) if S > 0 else 0.0

    def inverse(self, x: float) -> float:
        _check_inverse_domain(self, x)
        return self.theta * (self.beta0 / x - 1.0) ** (1.0 / self.n)

    def chi(self, y: float) -> float:
        rn = (y / self.theta) ** self.n
        return -self.n * self.beta0 * rn / (1.0 + rn) ** 2

    def second_derivative(self, S: float) -> float:
        if S <= 0:
            return 0.0
        n = self.n
        u = (S / self.theta) ** n
        return -self.beta0 * n * u * ((n - 1.0) - (n + 1.0) * u) / (S * S * (1.0 + u) ** 3)


@dataclass(frozen=True)
class GenericBeta(BetaRate):
    """Introduction rate given by a value callback and its exact derivative.

    ``deriv2`` is optional; without it the second derivative (only needed for
    dB/dtau) is a central difference of ``deriv``.
    """

    func: Callable[[float], float]
    deriv: Callable[[float], float]
    deriv2: Callable[[float], float] | None = None

    def value(self, S: float) -> float:
        return float(self.func(S))

    def derivative(self, S: float) -> float:
        return float(self.deriv(S))

    def second_derivative(self, S: float) -> float:
        if self.deriv2 is None:
            return super().second_derivative(S)
        return float(self.deriv2(S))


def _check_inverse_domain(beta: BetaRate, x: float) -> None:
    b0 = beta.at_zero
    if not (0.0 < x <= b0):
        raise DomainError(f"beta inverse needs 0 < x <= beta(0) = {b0}, got {x}")


def _bisect_inverse(beta: BetaRate, x: float) -> float:
    _check_inverse_domain(beta, x)
    if x == beta.at_zero:
        return 0.0
    hi = 1.0
    while beta.value(hi) > x:
        hi *= 2.0
        if hi > 1e300:
            raise DomainError(f"could not bracket beta(S) = {x}")
    return optimize.bisect(
        lambda s: beta.value(s) - x, 0.0, hi, xtol=1e-300, rtol=BISECT_RTOL, maxiter=2000
    )


def beta_eval(beta: BetaRate, S: float) -> float:
    if S < 0:
        raise DomainError(f"beta is defined on S >= 0, got {S}")
    return beta.value(S)


def beta_inv(beta: BetaRate, x: float, closed_form: bool | None = None) -> float:
    """Unique S >= 0 with beta(S) = x.

    ``closed_form=False`` forces bisection even for Hill rates.
    """
    if closed_form is False:
        return _bisect_inverse(beta, x)
    return beta.inverse(x)


@dataclass(frozen=True)
class ModelParams:
    delta: float
    tau: float
    beta: BetaRate

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"delta must be > 0, got {self.delta}")
        if not self.tau >= 0:
            raise DomainError(f"tau must be >= 0, got {self.tau}")

    def with_tau(self, tau: float) -> "ModelParams":
        return dataclasses.replace(self, tau=tau)

    @property
    def survival(self) -> float:
        """exp(-delta * tau)."""
        return math.exp(-self.delta * self.tau)

    @property
    def net_factor(self) -> float:
        """2 exp(-delta * tau) - 1."""
        return 2.0 * self.survival - 1.0


class SteadyKind(str, enum.Enum):
    TRIVIAL = "Trivial"
    POSITIVE = "Positive"


@dataclass(frozen=True)
class SteadyState:
    kind: SteadyKind
    S: float
    N: float


TRIVIAL_STATE = SteadyState(SteadyKind.TRIVIAL, 0.0, 0.0)


def clamp_population(x: float) -> float:
    """Clamp roundoff negativity to zero; larger negativity is an error."""
    if x >= 0.0:
        return x
    if x >= -CLAMP_TOL:
        return 0.0
    raise DomainError(f"population {x} is negative beyond roundoff")


def rhs(params: ModelParams, current, delayed) -> tuple[float, float]:
    S, N = current
    S_tau, N_tau = delayed
    beta = params.beta
    e = params.survival
    inflow = e * beta.value(clamp_population(S_tau)) * N_tau
    dS = -params.delta * S + inflow
    dN = -params.delta * N - beta.value(clamp_population(S)) * N + 2.0 * inflow
    return dS, dN


def existence_threshold_tau_bar(params: ModelParams) -> float | None:
    """Delay beyond which no positive steady state exists.

    Returns None when delta >= beta(0), in which case no delay admits one.
    """
    b0 = params.beta.at_zero
    d = params.delta
    if not d < b0:
        return None
    return math.log(2.0 * b0 / (d + b0)) / d


def positive_exists(params: ModelParams) -> bool:
    return params.net_factor * params.beta.at_zero > params.delta


def steady_positive(params: ModelParams, closed_form: bool | None = None) -> SteadyState | None:
    """Positive steady state E* = (S*, N*), or None if it does not exist."""
    if not positive_exists(params):
        return None
    q = params.net_factor
    beta = params.beta
    if isinstance(beta, HillBeta) and closed_form is not False:
        S = beta.theta * (q * beta.beta0 / params.delta - 1.0) ** (1.0 / beta.n)
    else:
        S = _bisect_inverse(beta, params.delta / q)
    N = q / params.survival * S
    return SteadyState(SteadyKind.POSITIVE, S, N)


def steady_states(params: ModelParams) -> list[SteadyState]:
    star = steady_positive(params)
    return [TRIVIAL_STATE] if star is None else [TRIVIAL_STATE, star]


# -- initial histories on [-tau, 0] ------------------------------------------


@dataclass(frozen=True)
class ConstantHistory:
    S: float
    N: float

    def __post_init__(self):
        if self.S < 0 or self.N < 0:
            raise DomainError("history must be nonnegative")

    def __call__(self, theta: float) -> tuple[float, float]:
        return self.S, self.N

    def arrays(self, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        thetas = np.asarray(thetas, dtype=float)
        return np.full_like(thetas, self.S), np.full_like(thetas, self.N)


@dataclass(frozen=True)
class TableHistory:
    """Sampled history, linearly interpolated between samples."""

    times: np.ndarray
    S: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "S", np.asarray(self.S, dtype=float))
        object.__setattr__(self, "N", np.asarray(self.N, dtype=float))
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("history times must be strictly increasing")
        if np.any(self.S < 0) or np.any(self.N < 0):
            raise DomainError("history must be nonnegative")

    def __call__(self, theta: float) -> tuple[float, float]:
        return (
            float(np.interp(theta, self.times, self.S)),
            float(np.interp(theta, self.times, self.N)),
        )

    def arrays(self, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.interp(thetas, self.times, self.S), np.interp(thetas, self.times, self.N)


def proliferating_from_trajectory(traj) -> np.ndarray:
    """Proliferating population P = S - N on the trajectory mesh."""
    return np.asarray(traj.S) - np.asarray(traj.N)


def proliferating_history_condition(
    params: ModelParams, history, quad_points: int = 256
) -> bool:
    """Whether the history keeps the proliferating population nonnegative.

    Checks S(0) >= N(0) + int_{-tau}^0 exp(delta s) beta(S(s)) N(s) ds.
    """
    if quad_points < 2:
        raise DomainError("quad_points must be >= 2")
    S0, N0 = history(0.0)
    if params.tau == 0:
        return S0 >= N0
    s = np.linspace(-params.tau, 0.0, quad_points)
    Sh, Nh = history.arrays(s)
    integrand = np.exp(params.delta * s) * np.array([params.beta.value(x) for x in Sh]) * Nh
    return bool(S0 >= N0 + np.trapezoid(integrand, s))
