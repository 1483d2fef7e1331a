"""Benchmark configuration: flat JSON files plus command-line overrides."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from ..integrators import Scheme

__all__ = ["BenchConfig", "load_config", "shipped_config", "default_out_dir", "MODELS"]

MODELS = ("zeitlin", "rigid_body", "static")
# Models whose dimension is fixed; their N list defaults to that size.
FIXED_DIM = {"rigid_body": 3}
OUT_ENV = "ISOFLOW_OUT"


def default_out_dir() -> str:
    return os.environ.get(OUT_ENV, "isoflow_out")


@dataclass(frozen=True)
class BenchConfig:
    """A benchmark grid over ``N x s x scheme`` plus run parameters.

    Attributes:
        model: Registry name of the model.
        N: Matrix sizes to run.
        s: Gauss-Legendre stage counts.
        schemes: Formulations to compare, any of ``A``, ``B``, ``C``.
        h: Step size.
        t_end: Physical simulated time; must be a whole number of steps.
        fp_tolerance: Fixed-point stopping tolerance.
        fp_max_iters: Fixed-point iteration cap.
        reps: Timed repetitions per cell (the median is reported).
        out: Output directory.
        dump_frames: Write an ISOFLOW1 trajectory per cell.
        ic: Optional ``l m re im`` initial-condition file (Zeitlin only).
    """

    model: str = "zeitlin"
    N: tuple[int, ...] = (17,)
    s: tuple[int, ...] = (1,)
    schemes: tuple[str, ...] = ("A", "B", "C")
    h: float = 0.1
    t_end: float = 5.0
    fp_tolerance: float = 1e-13
    fp_max_iters: int = 100
    reps: int = 3
    out: str = field(default_factory=default_out_dir)
    dump_frames: bool = False
    ic: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model: unknown model {self.model!r}, expected one of {MODELS}", "model")
        for name in ("N", "s", "schemes"):
            value = getattr(self, name)
            if not value:
                raise ConfigError(f"{name}: list must be nonempty", name)
        for n in self.N:
            if not _is_int(n) or n < 2:
                raise ConfigError(f"N: sizes must be integers >= 2, got {n!r}", "N")
        fixed = FIXED_DIM.get(self.model)
        if fixed is not None and any(n != fixed for n in self.N):
            raise ConfigError(f"N: model {self.model} has fixed size {fixed}", "N")
        for s in self.s:
            if not _is_int(s) or s < 1:
                raise ConfigError(f"s: stage counts must be integers >= 1, got {s!r}", "s")
        for sc in self.schemes:
            if sc not in Scheme.__members__:
                raise ConfigError(f"schemes: unknown scheme {sc!r}", "schemes")
        for name in ("h", "t_end", "fp_tolerance"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"{name}: must be a positive number, got {v!r}", name)
        for name in ("fp_max_iters", "reps"):
            v = getattr(self, name)
            if not _is_int(v) or v < 1:
                raise ConfigError(f"{name}: must be an integer >= 1, got {v!r}", name)
        ratio = self.t_end / self.h
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(f"t_end: {self.t_end} is not a whole number of steps of h={self.h}", "t_end")
        if self.ic is not None and self.model != "zeitlin":
            raise ConfigError("ic: initial-condition files apply to the zeitlin model only", "ic")
        if not isinstance(self.dump_frames, bool):
            raise ConfigError("dump_frames: must be true or false", "dump_frames")

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.h))

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("N", "s", "schemes"):
            d[name] = list(d[name])
        return d


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _normalize(data: dict) -> dict:
    known = {f.name for f in fields(BenchConfig)}
    out = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{key}: unknown configuration field", key)
        if key in ("N", "s", "schemes"):
            if isinstance(value, (str, int)) and not isinstance(value, bool):
                value = [value]
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"{key}: expected a list, got {type(value).__name__}", key)
            value = tuple(v.upper() if key == "schemes" and isinstance(v, str) else v for v in value)
        elif key in ("h", "t_end", "fp_tolerance") and _is_int(value):
            value = float(value)
        out[key] = value
    return out


def load_config(path=None, overrides: dict | None = None) -> BenchConfig:
    """Build a validated config from a JSON file and override mapping.

    Precedence is override > file > default. ``None`` override values are
    ignored. With a fixed-size model and no explicit ``N``, ``N`` defaults to
    the model's size.

    Raises:
        ConfigError: on unreadable or malformed JSON (with line and column) or
            on an invalid field (the field name leads the message).
    """
    data = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"{p}: cannot read config: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{p}: config must be a flat JSON object")
    merged = _normalize(data)
    merged.update(_normalize({k: v for k, v in (overrides or {}).items() if v is not None}))
    model = merged.get("model", "zeitlin")
    if "N" not in merged and model in FIXED_DIM:
        merged["N"] = (FIXED_DIM[model],)
    try:
        return BenchConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def shipped_config(name: str) -> Path:
    """Path of a config shipped with the package (``full`` or ``desk``)."""
    ref = resources.files("isoflow.bench") / "configs" / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"no shipped config named {name!r}")
    return Path(str(ref))

