"""Cell types, the logical-effort delay model and statistical edge delays."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .stat_dist import DiscreteDist

_FIELDS = {"dint": "d_int", "k": "k_effort", "ccell": "ccell_min", "cin": "cin_min", "pins": "n_pins"}
_CELL_RE = re.compile(r"^cell\s+(\S+)\s+(.*)$")


class LibraryError(ValueError):
    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}" if lineno is not None else msg)


@dataclass(frozen=True)
class CellType:
    name: str
    d_int: float
    k_effort: float
    ccell_min: float
    cin_min: float
    n_pins: int

    def __post_init__(self):
        if self.d_int < 0:
            raise LibraryError(f"cell {self.name}: non-positive parameter dint={self.d_int}")
        for label, value in (("k", self.k_effort), ("ccell", self.ccell_min), ("cin", self.cin_min)):
            if not value > 0:
                raise LibraryError(f"cell {self.name}: non-positive parameter {label}={value}")
        if self.n_pins < 1:
            raise LibraryError(f"cell {self.name}: non-positive parameter pins={self.n_pins}")

    def fo4_delay(self) -> float:
        """Nominal delay at minimum size driving four copies of its own input."""
        return self.d_int + self.k_effort * 4.0 * self.cin_min / self.ccell_min


@dataclass(frozen=True)
class GateInstance:
    id: str
    cell: CellType
    w: float = 1.0

    def __post_init__(self):
        if self.w < 1:
            raise ValueError(f"gate {self.id}: size {self.w} below minimum")

    @property
    def ccell(self) -> float:
        return self.w * self.cell.ccell_min

    @property
    def cin(self) -> float:
        return self.w * self.cell.cin_min


@dataclass(frozen=True)
class VariationModel:
    sigma_frac: float = 0.1
    trunc_k: float = 3.0

    def __post_init__(self):
        if not 0 < self.sigma_frac < 1:
            raise ValueError(f"sigma_frac must lie in (0, 1), got {self.sigma_frac}")
        if not self.trunc_k > 0:
            raise ValueError(f"trunc_k must be positive, got {self.trunc_k}")


class Library(dict):
    """Mapping of cell name to :class:`CellType`."""

    def smallest_inverter(self) -> CellType:
        invs = [c for c in self.values() if c.n_pins == 1 and c.name.upper() in ("NOT", "INV")]
        if not invs:
            invs = [c for c in self.values() if c.n_pins == 1] or list(self.values())
        return min(invs, key=lambda c: (c.cin_min, c.name))

    def default_po_load(self) -> float:
        return 4.0 * self.smallest_inverter().cin_min

    def default_bin_width(self) -> float:
        return max(c.fo4_delay() for c in self.values()) / 1000.0


def load_library(text: str) -> Library:
    lib = Library()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _CELL_RE.match(line)
        if not m:
            raise LibraryError(f"expected 'cell <name> key=value ...', got {raw.strip()!r}", lineno)
        name, rest = m.group(1), m.group(2)
        vals = {}
        for tok in rest.split():
            key, sep, value = tok.partition("=")
            if not sep or key not in _FIELDS:
                raise LibraryError(f"bad field {tok!r}", lineno)
            if _FIELDS[key] in vals:
                raise LibraryError(f"field {key} given twice", lineno)
            try:
                vals[_FIELDS[key]] = int(value) if key == "pins" else float(value)
            except ValueError:
                raise LibraryError(f"bad number in {tok!r}", lineno) from None
        missing = set(_FIELDS.values()) - set(vals)
        if missing:
            raise LibraryError(f"cell {name}: missing {sorted(missing)}", lineno)
        if name in lib:
            raise LibraryError(f"duplicate cell name {name}", lineno)
        try:
            lib[name] = CellType(name=name, **vals)
        except LibraryError as e:
            raise LibraryError(str(e), lineno) from None
    if not lib:
        raise LibraryError("no cells defined")
    return lib


def read_library(path) -> Library:
    return load_library(Path(path).read_text())


def write_library(lib: Library) -> str:
    lines = []
    for c in lib.values():
        lines.append(
            f"cell {c.name} dint={c.d_int!r} k={c.k_effort!r} ccell={c.ccell_min!r} "
            f"cin={c.cin_min!r} pins={c.n_pins}"
        )
    return "\n".join(lines) + "\n"


def nominal_edge_delay(gate: GateInstance, c_load: float) -> float:
    return gate.cell.d_int + gate.cell.k_effort * c_load / (gate.w * gate.cell.ccell_min)


def nominal_delay(cell: CellType, w: float, c_load: float) -> float:
    return cell.d_int + cell.k_effort * c_load / (w * cell.ccell_min)


def edge_delay_dist(gate: GateInstance, c_load: float, vm: VariationModel,
                    bin_width: float) -> DiscreteDist:
    return truncated_gaussian(nominal_edge_delay(gate, c_load), vm, bin_width)


def truncated_gaussian(mean: float, vm: VariationModel, bin_width: float) -> DiscreteDist:
    """Gaussian(mean, sigma_frac*mean) truncated at trunc_k sigmas, binned on the grid.

    Each bin receives the probability of its centred interval; the mass
    outside the truncation window is dropped and the rest renormalized.
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    if not mean > 0:
        raise ValueError(f"nominal delay must be positive, got {mean}")
    return _tg_cached(float(mean), vm.sigma_frac, vm.trunc_k, float(bin_width))


@lru_cache(maxsize=65536)
def _tg_cached(mean, sigma_frac, trunc_k, bw):
    sigma = sigma_frac * mean
    lo, hi = mean - trunc_k * sigma, mean + trunc_k * sigma
    k_lo = int(math.floor(lo / bw + 0.5))
    k_hi = int(math.floor(hi / bw + 0.5))
    if k_lo == k_hi:
        # whole truncation window inside one bin
        return DiscreteDist(bw, k_lo, np.ones(1))
    ks = np.arange(k_lo, k_hi + 1)
    left = np.maximum((ks - 0.5) * bw, lo)
    right = np.minimum((ks + 0.5) * bw, hi)
    mass = ndtr((right - mean) / sigma) - ndtr((left - mean) / sigma)
    mass = np.clip(mass, 0.0, None)
    keep = np.flatnonzero(mass > 0)
    mass = mass[keep[0]:keep[-1] + 1]
    return DiscreteDist(bw, int(ks[keep[0]]), mass / mass.sum())
