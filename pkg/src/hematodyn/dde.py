"""Fixed-step method-of-steps integrator with cubic Hermite dense output.

The step h = tau / m divides the delay, so the delayed arguments of the
first and last RK4 stages fall on mesh nodes and only the midpoint stage
needs interpolation, from an interval that is already complete.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ConfigError, DomainError, IntegrationError
from .model import CLAMP_TOL, ModelParams

BLOWUP = 1e12


@dataclass(frozen=True)
class SolverConfig:
    steps_per_delay: int = 128
    t_end: float = 1500.0
    dt: float = 0.02  # only used when tau == 0

    def __post_init__(self):
        if self.steps_per_delay < 4:
            raise ConfigError("steps_per_delay must be >= 4")
        if not self.t_end > 0:
            raise ConfigError("t_end must be > 0")
        if not self.dt > 0:
            raise ConfigError("dt must be > 0")


@dataclass
class Trajectory:
    """Mesh solution with node derivatives for dense output.

    ``history`` and ``params`` may be None for synthetic trajectories; then
    sampling is restricted to the mesh span.
    """

    t: np.ndarray
    S: np.ndarray
    N: np.ndarray
    dS: np.ndarray
    dN: np.ndarray
    h: float
    tau: float = 0.0
    history: Any = None
    params: ModelParams | None = None

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @classmethod
    def from_samples(cls, t, S, N, dS=None, dN=None) -> "Trajectory":
        """Wrap uniformly sampled data; missing derivatives come from np.gradient."""
        t = np.asarray(t, dtype=float)
        S = np.asarray(S, dtype=float)
        N = np.asarray(N, dtype=float)
        dS = np.gradient(S, t) if dS is None else np.asarray(dS, dtype=float)
        dN = np.gradient(N, t) if dN is None else np.asarray(dN, dtype=float)
        return cls(t, S, N, dS, dN, h=float(t[1] - t[0]))


def _hermite(y0, y1, f0, f1, h, s):
    s2 = s * s
    s3 = s2 * s
    return (
        (2 * s3 - 3 * s2 + 1) * y0
        + (s3 - 2 * s2 + s) * h * f0
        + (-2 * s3 + 3 * s2) * y1
        + (s3 - s2) * h * f1
    )


def sample(traj: Trajectory, t):
    """State (S, N) at time(s) t by cubic value-derivative interpolation."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    t0 = traj.t[0]
    lo = -traj.tau if traj.history is not None else t0
    if np.any(t < lo - 1e-12) or np.any(t > traj.t_end + 1e-9 * max(1.0, traj.t_end)):
        raise DomainError(f"sample time outside [{lo}, {traj.t_end}]")
    S = np.empty_like(t)
    N = np.empty_like(t)
    past = t < t0
    if np.any(past):
        S[past], N[past] = traj.history.arrays(t[past])
    now = ~past
    if np.any(now):
        x = (t[now] - t0) / traj.h
        i = np.clip(np.floor(x).astype(int), 0, len(traj.t) - 2)
        s = x - i
        S[now] = _hermite(traj.S[i], traj.S[i + 1], traj.dS[i], traj.dS[i + 1], traj.h, s)
        N[now] = _hermite(traj.N[i], traj.N[i + 1], traj.dN[i], traj.dN[i + 1], traj.h, s)
    if scalar:
        return float(S[0]), float(N[0])
    return S, N


def _clamp(x: float) -> float:
    if x >= 0.0:
        return x
    if x >= -CLAMP_TOL:
        return 0.0
    raise IntegrationError(f"negative population {x:.3e} beyond roundoff")


def _check(S: float, N: float, t: float) -> None:
    if not (S < BLOWUP and N < BLOWUP):
        raise IntegrationError(f"state exceeded {BLOWUP:g} (or became non-finite) at t={t:g}")


def integrate(params: ModelParams, history, config: SolverConfig = SolverConfig()) -> Trajectory:
    """Integrate the delayed system from a history on [-tau, 0] to ``config.t_end``."""
    if params.tau == 0:
        return _integrate_ode(params, history, config)

    d, tau = params.delta, params.tau
    e = params.survival
    bv = params.beta.value
    m = config.steps_per_delay
    h = tau / m
    nsteps = max(1, math.ceil(config.t_end / h - 1e-9))

    # delayed inflow e * beta(S) * N on history nodes j = -m..0 and midpoints
    th = np.linspace(-tau, 0.0, m + 1)
    Hs, Hn = history.arrays(th)
    Ms, Mn = history.arrays(th[:-1] + 0.5 * h)
    hist_node = [e * bv(_clamp(s)) * n for s, n in zip(Hs, Hn)]
    hist_mid = [e * bv(_clamp(s)) * n for s, n in zip(Ms, Mn)]

    S = [0.0] * (nsteps + 1)
    N = [0.0] * (nsteps + 1)
    dS = [0.0] * (nsteps + 1)
    dN = [0.0] * (nsteps + 1)
    inflow = [0.0] * (nsteps + 1)  # e * beta(S_i) * N_i at solution nodes

    def delayed_node(j):
        # node j of the global mesh, j <= current index - m
        return hist_node[j + m] if j <= 0 else inflow[j]

    S0, N0 = history(0.0)
    S[0], N[0] = float(S0), float(N0)
    for i in range(nsteps + 1):
        Si, Ni = S[i], N[i]
        Sc = _clamp(Si)
        bi = bv(Sc)
        inflow[i] = e * bi * Ni
        D0 = delayed_node(i - m)
        dS[i] = -d * Si + D0
        dN[i] = -d * Ni - bi * Ni + 2 * D0
        if i == nsteps:
            break

        j = i - m
        D1 = delayed_node(j + 1)
        if j < 0:
            Dm = hist_mid[j + m]
        else:
            Sm = 0.5 * (S[j] + S[j + 1]) + 0.125 * h * (dS[j] - dS[j + 1])
            Nm = 0.5 * (N[j] + N[j + 1]) + 0.125 * h * (dN[j] - dN[j + 1])
            Dm = e * bv(_clamp(Sm)) * Nm

        k1s, k1n = dS[i], dN[i]
        s2 = Si + 0.5 * h * k1s
        n2 = Ni + 0.5 * h * k1n
        b2 = bv(_clamp(s2))
        k2s = -d * s2 + Dm
        k2n = -d * n2 - b2 * n2 + 2 * Dm
        s3 = Si + 0.5 * h * k2s
        n3 = Ni + 0.5 * h * k2n
        b3 = bv(_clamp(s3))
        k3s = -d * s3 + Dm
        k3n = -d * n3 - b3 * n3 + 2 * Dm
        s4 = Si + h * k3s
        n4 = Ni + h * k3n
        b4 = bv(_clamp(s4))
        k4s = -d * s4 + D1
        k4n = -d * n4 - b4 * n4 + 2 * D1

        Snew = _clamp(Si + h / 6 * (k1s + 2 * k2s + 2 * k3s + k4s))
        Nnew = _clamp(Ni + h / 6 * (k1n + 2 * k2n + 2 * k3n + k4n))
        _check(Snew, Nnew, (i + 1) * h)
        S[i + 1], N[i + 1] = Snew, Nnew

    t = np.arange(nsteps + 1) * h
    return Trajectory(
        t, np.array(S), np.array(N), np.array(dS), np.array(dN), h, tau, history, params
    )


def _integrate_ode(params: ModelParams, history, config: SolverConfig) -> Trajectory:
    d = params.delta
    bv = params.beta.value
    nsteps = max(1, math.ceil(config.t_end / config.dt - 1e-9))
    h = config.t_end / nsteps

    def f(s, n):
        b = bv(_clamp(s))
        return -d * s + b * n, -d * n + b * n

    S = np.empty(nsteps + 1)
    N = np.empty(nsteps + 1)
    dS = np.empty(nsteps + 1)
    dN = np.empty(nsteps + 1)
    s, n = (float(x) for x in history(0.0))
    for i in range(nsteps + 1):
        S[i], N[i] = s, n
        k1 = f(s, n)
        dS[i], dN[i] = k1
        if i == nsteps:
            break
        k2 = f(s + 0.5 * h * k1[0], n + 0.5 * h * k1[1])
        k3 = f(s + 0.5 * h * k2[0], n + 0.5 * h * k2[1])
        k4 = f(s + h * k3[0], n + h * k3[1])
        s = _clamp(s + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]))
        n = _clamp(n + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))
        _check(s, n, (i + 1) * h)
    t = np.arange(nsteps + 1) * h
    return Trajectory(t, S, N, dS, dN, h, 0.0, history, params)


def convergence_order(
    params: ModelParams,
    history,
    t_probe: float,
    base_steps: int = 8,
    base_dt: float = 0.1,
    floor: float = 1e-13,
) -> float | None:
    """Observed order from runs at m, 2m and 4m steps per delay (dt, dt/2, dt/4 for tau=0).

    Errors of the two coarse runs are measured against the finest at
    ``t_probe``. Returns None when the errors are at roundoff level, e.g. for
    a history sitting on a steady state.
    """
    runs = []
    for r in (1, 2, 4):
        cfg = SolverConfig(steps_per_delay=base_steps * r, t_end=t_probe, dt=base_dt / r)
        traj = integrate(params, history, cfg)
        runs.append(np.array(sample(traj, t_probe)))
    e1 = np.max(np.abs(runs[0] - runs[2]))
    e2 = np.max(np.abs(runs[1] - runs[2]))
    if e1 < floor or e2 < floor:
        return None
    return math.log2(e1 / e2)
