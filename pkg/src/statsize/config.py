"""Run configuration: a flat ``key = value`` text format with CLI overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .sizer import MODES

PRUNE_RULES = ("strict", "guarded")

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_LIBRARY = str(DATA_DIR / "example.lib")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    netlist: str = ""
    library: str = DEFAULT_LIBRARY
    bin_width: Optional[float] = None     # None: derived from the library
    sigma_frac: float = 0.1
    trunc_k: float = 3.0
    po_load: Optional[float] = None       # None: 4x the smallest inverter input
    p: float = 0.99
    delta_w: float = 1.0
    mode: str = "stat"
    max_iterations: int = 1000
    area_budget: Optional[float] = None   # fractional increase over the start area
    w_max: float = 16.0
    verify: bool = False
    prune: str = "strict"                 # "guarded" adds the one-bin margin
    seed: int = 0
    mc_samples: int = 100_000
    report: Optional[str] = None
    curve: Optional[str] = None
    output: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.bin_width is not None and self.bin_width <= 0:
            raise ConfigError("bin_width must be positive")
        if not 0 < self.sigma_frac < 1:
            raise ConfigError("sigma_frac must lie in (0, 1)")
        if self.trunc_k <= 0:
            raise ConfigError("trunc_k must be positive")
        if self.po_load is not None and self.po_load < 0:
            raise ConfigError("po_load must be non-negative")
        if not 0 < self.p < 1:
            raise ConfigError("p must lie in (0, 1)")
        if self.delta_w <= 0:
            raise ConfigError("delta_w must be positive")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.prune not in PRUNE_RULES:
            raise ConfigError(f"prune must be one of {PRUNE_RULES}")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be non-negative")
        if self.area_budget is not None and self.area_budget < 0:
            raise ConfigError("area_budget must be non-negative")
        if self.w_max < 1:
            raise ConfigError("w_max must be at least 1")
        if self.mc_samples < 1:
            raise ConfigError("mc_samples must be at least 1")
        return self

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, float):
                v = repr(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)


def _convert(name: str, raw: str, lineno=None):
    where = f"line {lineno}: " if lineno else ""
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"{where}unknown key {name!r}")
    t = types[name]
    if raw.lower() in ("none", "") and "Optional" in t:
        return None
    try:
        if "bool" in t:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "int" in t:
            return int(raw)
        if "float" in t:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{where}bad value for {name}: {raw!r}") from None
    return raw


def parse_config(text: str, base: RunConfig = None) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        values[k] = _convert(k, v, lineno)
    cfg = dataclasses.replace(base or RunConfig(), **values)
    return cfg.validate()


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def resolve_netlist(path: str) -> Path:
    """Use ``path`` if it exists, else fall back to a shipped benchmark of that name."""
    p = Path(path)
    if p.exists():
        return p
    for cand in (DATA_DIR / path, DATA_DIR / f"{path}.bench"):
        if cand.exists():
            return cand
    return p
