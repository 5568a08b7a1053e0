"""Trajectory post-processing: long-run verdicts, periods, Lyapunov monitor, positivity."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dde import Trajectory, sample
from .model import CLAMP_TOL, SteadyKind, SteadyState

DEFAULT_WINDOW = 300.0
DEFAULT_TOL = 1e-4
SPACING_CV_MAX = 0.05
# envelope ratio between consecutive thirds of the window that counts as decay
CONTRACTION = 0.9


class Verdict(str, enum.Enum):
    CONVERGED_TO_TRIVIAL = "ConvergedToTrivial"
    CONVERGED_TO_POSITIVE = "ConvergedToPositive"
    SUSTAINED_OSCILLATION = "SustainedOscillation"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class SimulationSummary:
    verdict: Verdict
    period: float | None
    amplitude_N: float | None
    final_state: tuple[float, float]
    transient_discarded: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "period": self.period,
            "amplitude_N": self.amplitude_N,
            "final_state": list(self.final_state),
            "transient_discarded": self.transient_discarded,
        }


def find_peaks(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Times of strict local maxima, refined by a parabola through three points."""
    y0, y1, y2 = y[:-2], y[1:-1], y[2:]
    idx = np.nonzero((y1 > y0) & (y1 >= y2))[0] + 1
    if idx.size == 0:
        return np.empty(0)
    a, b, c = y[idx - 1], y[idx], y[idx + 1]
    denom = a - 2 * b + c
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(denom != 0, 0.5 * (a - c) / denom, 0.0)
    dt = t[1] - t[0]
    return t[idx] + shift * dt


def _peak_spacings(traj: Trajectory, start: float) -> np.ndarray:
    mask = traj.t >= start
    peaks = find_peaks(traj.t[mask], traj.N[mask])
    return np.diff(peaks)


def estimate_period(traj: Trajectory, transient: float | None = None) -> float | None:
    """Mean spacing of the peaks of N after ``transient`` (default: first 2/3 of the run).

    Returns None with fewer than four peaks or a flat (roundoff-level) signal.
    """
    if transient is None:
        transient = traj.t[0] + 2.0 / 3.0 * (traj.t_end - traj.t[0])
    mask = traj.t >= transient
    if np.ptp(traj.N[mask]) <= 1e-10:
        return None
    gaps = _peak_spacings(traj, transient)
    if gaps.size < 3:
        return None
    return float(np.mean(gaps))


def _decaying(dist: np.ndarray) -> bool:
    thirds = np.array_split(dist, 3)
    m1, m2, m3 = (float(np.max(x)) for x in thirds)
    return m1 > 0 and m2 < CONTRACTION * m1 and m3 < CONTRACTION * m2


def classify(
    traj: Trajectory,
    steady: list[SteadyState],
    window: float = DEFAULT_WINDOW,
    tol: float = DEFAULT_TOL,
) -> SimulationSummary:
    """Long-run verdict from the final ``window`` days of a trajectory.

    A steady state counts as reached when the sup distance to it stays below
    ``tol`` over the window, or when that distance shrinks geometrically
    across the window (slow exponential approach, e.g. near tau_bar).
    """
    start = traj.t_end - window
    mask = traj.t >= start
    S, N = traj.S[mask], traj.N[mask]
    final = (float(traj.S[-1]), float(traj.N[-1]))

    best = None
    for st in steady:
        dist = np.maximum(np.abs(S - st.S), np.abs(N - st.N))
        if np.max(dist) < tol or _decaying(dist):
            if best is None or dist[-1] < best[1]:
                best = (st, dist[-1])
    if best is not None:
        verdict = (
            Verdict.CONVERGED_TO_TRIVIAL
            if best[0].kind == SteadyKind.TRIVIAL
            else Verdict.CONVERGED_TO_POSITIVE
        )
        return SimulationSummary(verdict, None, None, final, start)

    span = float(np.max(N) - np.min(N))
    gaps = _peak_spacings(traj, start)
    if gaps.size >= 3 and span > 10 * tol:
        cv = float(np.std(gaps) / np.mean(gaps))
        if cv < SPACING_CV_MAX:
            return SimulationSummary(
                Verdict.SUSTAINED_OSCILLATION, float(np.mean(gaps)), span / 2, final, start
            )
    return SimulationSummary(Verdict.UNDETERMINED, None, None, final, start)


@dataclass(frozen=True)
class LyapunovTrace:
    times: np.ndarray
    values: np.ndarray

    def is_nonincreasing(self, slack: float = 1e-8) -> bool:
        return bool(np.all(np.diff(self.values) <= slack))


def lyapunov_trace(traj: Trajectory, refine: int = 4) -> LyapunovTrace:
    """Y(t) = N(t) + 2 exp(-delta tau) * integral over [t - tau, t] of beta(S) N.

    The window integral is a composite trapezoid on the mesh subdivided
    ``refine`` times with dense output; h divides tau so window edges are
    nodes. History values cover t < tau.
    """
    params = traj.params
    tau = traj.tau
    if tau == 0:
        return LyapunovTrace(traj.t.copy(), traj.N.copy())
    m = int(round(tau / traj.h)) * refine
    hf = traj.h / refine
    n_fine = (len(traj.t) - 1) * refine
    tf = np.concatenate([-tau + np.arange(m) * hf, traj.t[0] + np.arange(n_fine + 1) * hf])
    Sf, Nf = sample(traj, np.minimum(tf, traj.t_end))
    bv = params.beta.value
    g = np.array([bv(max(s, 0.0)) for s in Sf]) * Nf
    c = np.concatenate([[0.0], np.cumsum(0.5 * hf * (g[1:] + g[:-1]))])
    nodes = m + np.arange(len(traj.t)) * refine
    integral = c[nodes] - c[nodes - m]
    Y = traj.N + 2 * params.survival * integral
    return LyapunovTrace(traj.t.copy(), Y)


@dataclass(frozen=True)
class PositivityReport:
    min_S: float
    min_N: float
    first_violation: float | None

    @property
    def ok(self) -> bool:
        return self.first_violation is None


def positivity_audit(traj: Trajectory) -> PositivityReport:
    bad = np.nonzero((traj.S < -CLAMP_TOL) | (traj.N < -CLAMP_TOL))[0]
    first = float(traj.t[bad[0]]) if bad.size else None
    return PositivityReport(float(np.min(traj.S)), float(np.min(traj.N)), first)
