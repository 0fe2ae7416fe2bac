"""Experiment configuration loaded from an INI-style key-value file.

Example::

    [experiment]
    name = exp1
    n = 2-8
    shots = 10000
    seed = 7
    backend = auto

    [noise]
    enabled = true
    p2q = 0.003
    T1 = 263
    T2 = 149
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from ..circuit import GateDurations
from ..noise import NoiseParams
from .engine import BACKEND_CHOICES

EXPERIMENTS = ("exp1", "exp2", "exp3", "exp4", "corr-scan", "mixedness")
ALL_SCENARIOS = ("2-1", "2-2", "2-3", "undecrypted")

_DEFAULT_N = {"exp1": (2, 3, 4, 5, 6, 7, 8), "exp2": (2, 3, 4, 5, 6), "corr-scan": (2, 4), "mixedness": (2, 4)}


def parse_range(text: str) -> tuple[int, ...]:
    """'2-8' -> (2..8); '1,3,5' -> (1, 3, 5); mixed forms allowed."""
    out: list[int] = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1) if not part.startswith("-") else (part, part)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo_i, hi_i + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty sweep {text!r}")
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "exp1"
    n_values: Optional[tuple[int, ...]] = None
    l_values: tuple[int, ...] = (0, 1, 2)
    r_values: tuple[int, ...] = (1, 2, 3, 4, 5)
    scenarios: tuple[str, ...] = ALL_SCENARIOS
    strategy: str = "full"
    extra: int = 0
    shots: int = 10_000
    seed: int = 0
    noise: Optional[NoiseParams] = None  # None means noiseless
    backend: str = "auto"
    out: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.n_values is None:
            object.__setattr__(self, "n_values", _DEFAULT_N.get(self.experiment, (2,)))
        for name in ("n_values", "l_values", "r_values", "scenarios"):
            v = tuple(getattr(self, name))
            if not v:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, v)
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.backend not in BACKEND_CHOICES:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {BACKEND_CHOICES}")
        if self.strategy not in ("full", "single-branch"):
            raise ValueError("strategy must be 'full' or 'single-branch'")
        bad = set(self.scenarios) - set(ALL_SCENARIOS)
        if bad:
            raise ValueError(f"unknown scenarios {sorted(bad)}")
        if min(self.n_values) < 1 or min(self.r_values) < 1 or min(self.l_values) < 0:
            raise ValueError("sweep values out of range")

    @property
    def noisy(self) -> bool:
        return self.noise is not None and not self.noise.is_noiseless

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _float(v: str) -> float:
    return math.inf if v.strip().lower() in ("inf", "infinity", "none") else float(v)


def load_config(path: Optional[str] = None, text: Optional[str] = None, experiment: Optional[str] = None) -> ExperimentConfig:
    """Read a config file (or text).  Missing keys keep their defaults."""
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep T1/T2 capitalisation
    if path is not None:
        with open(path) as fh:
            cp.read_file(fh)
    elif text is not None:
        cp.read_string(text)
    kw: dict = {}
    if cp.has_section("experiment"):
        sec = cp["experiment"]
        known = {f.name for f in fields(ExperimentConfig)} | {"name", "n", "l", "r"}
        unknown = set(sec) - known
        if unknown:
            raise ValueError(f"unknown [experiment] keys: {sorted(unknown)}")
        if "name" in sec:
            kw["experiment"] = sec["name"]
        if "experiment" in sec:
            kw["experiment"] = sec["experiment"]
        for key, dest in (("n", "n_values"), ("l", "l_values"), ("r", "r_values")):
            if key in sec:
                kw[dest] = parse_range(sec[key])
        if "scenarios" in sec:
            kw["scenarios"] = tuple(s.strip() for s in sec["scenarios"].split(",") if s.strip())
        for key in ("shots", "seed", "extra"):
            if key in sec:
                kw[key] = sec.getint(key)
        for key in ("strategy", "backend", "out"):
            if key in sec:
                kw[key] = sec[key].strip()
    if experiment is not None:
        kw["experiment"] = experiment
    if cp.has_section("noise"):
        kw["noise"] = _noise_from_section(cp["noise"])
    return ExperimentConfig(**kw)


def _noise_from_section(sec) -> Optional[NoiseParams]:
    if not sec.getboolean("enabled", fallback=True):
        return None
    base = NoiseParams()
    dur = GateDurations(
        one_qubit=sec.getfloat("t_1q", fallback=base.durations.one_qubit),
        two_qubit=sec.getfloat("t_2q", fallback=base.durations.two_qubit),
        measure=sec.getfloat("t_measure", fallback=base.durations.measure),
    )
    known = {"enabled", "p2q", "p1q", "T1", "T2", "t_1q", "t_2q", "t_measure", "trajectories", "twirl_idle", "jitter"}
    unknown = set(sec) - known
    if unknown:
        raise ValueError(f"unknown [noise] keys: {sorted(unknown)}")
    return NoiseParams(
        p2q=sec.getfloat("p2q", fallback=base.p2q),
        p1q=sec.getfloat("p1q", fallback=base.p1q),
        T1=_float(sec.get("T1", str(base.T1))),
        T2=_float(sec.get("T2", str(base.T2))),
        durations=dur,
        trajectories=sec.getint("trajectories", fallback=base.trajectories),
        twirl_idle=sec.getboolean("twirl_idle", fallback=base.twirl_idle),
        jitter=sec.getfloat("jitter", fallback=base.jitter),
    )
