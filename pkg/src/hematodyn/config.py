"""Run configuration: JSON file plus command-line overrides."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .dde import SolverConfig
from .errors import ConfigError, DomainError
from .model import HillBeta, ModelParams

# parameter set of the reference example, with n = 12
DEFAULT_MODEL = {"delta": 0.05, "beta": {"kind": "hill", "beta0": 1.77, "theta": 1.0, "n": 12.0}}


@dataclass(frozen=True)
class AnalysisConfig:
    window: float = 300.0
    tol: float = 1e-4

    def __post_init__(self):
        if not (self.window > 0 and self.tol > 0):
            raise ConfigError("analysis window and tol must be > 0")


@dataclass(frozen=True)
class OutputConfig:
    path: str | None = None
    stride: int = 1

    def __post_init__(self):
        if self.stride < 1:
            raise ConfigError("output stride must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    delta: float
    beta: HillBeta
    tau: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def params(self, tau: float | None = None) -> ModelParams:
        tau = self.tau if tau is None else tau
        if tau is None:
            tau = 0.0
        try:
            return ModelParams(self.delta, tau, self.beta)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc


def _strict(section: dict, allowed: set[str], where: str) -> dict:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    return section


def _names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def _build_beta(spec: dict) -> HillBeta:
    spec = _strict(spec, {"kind", "beta0", "theta", "n"}, "model.beta")
    kind = spec.get("kind", "hill")
    if kind != "hill":
        raise ConfigError(f"unsupported beta kind {kind!r}")
    try:
        return HillBeta(
            float(spec.get("beta0", 1.77)), float(spec.get("theta", 1.0)), float(spec.get("n", 12.0))
        )
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def from_dict(data: dict) -> RunConfig:
    data = _strict(data, {"model", "solver", "analysis", "output"}, "config")
    model = _strict(data.get("model", DEFAULT_MODEL), {"delta", "beta", "tau"}, "model")
    try:
        solver = SolverConfig(**_strict(data.get("solver", {}), _names(SolverConfig), "solver"))
        analysis = AnalysisConfig(
            **_strict(data.get("analysis", {}), _names(AnalysisConfig), "analysis")
        )
        output = OutputConfig(**_strict(data.get("output", {}), _names(OutputConfig), "output"))
        delta = float(model.get("delta", DEFAULT_MODEL["delta"]))
        tau = model.get("tau")
        tau = None if tau is None else float(tau)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not delta > 0:
        raise ConfigError("delta must be > 0")
    if tau is not None and tau < 0:
        raise ConfigError("tau must be >= 0")
    beta = _build_beta(model.get("beta", DEFAULT_MODEL["beta"]))
    return RunConfig(delta, beta, tau, solver, analysis, output)


def load(path: str | Path | None) -> RunConfig:
    if path is None:
        return from_dict({})
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return from_dict(data)


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    """Apply non-None overrides; keys are flat flag names."""
    try:
        beta = cfg.beta
        bkw = {k: kw[k] for k in ("beta0", "theta", "n") if kw.get(k) is not None}
        if bkw:
            beta = replace(beta, **bkw)
        skw = {k: kw[k] for k in ("steps_per_delay", "t_end", "dt") if kw.get(k) is not None}
        akw = {k: kw[k] for k in ("window", "tol") if kw.get(k) is not None}
        okw = {k: kw[k] for k in ("path", "stride") if kw.get(k) is not None}
        out = replace(
            cfg,
            beta=beta,
            solver=replace(cfg.solver, **skw),
            analysis=replace(cfg.analysis, **akw),
            output=replace(cfg.output, **okw),
        )
        if kw.get("delta") is not None:
            if not kw["delta"] > 0:
                raise ConfigError("delta must be > 0")
            out = replace(out, delta=kw["delta"])
        if kw.get("tau") is not None:
            if kw["tau"] < 0:
                raise ConfigError("tau must be >= 0")
            out = replace(out, tau=kw["tau"])
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return out
