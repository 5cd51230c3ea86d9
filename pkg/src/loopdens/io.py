"""Result serialization (JSON / CSV) and the append-only result cache."""

from __future__ import annotations

import json
import logging
import os
import time
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from .asymptotics import AngleFit, DensitySample, FitResult, scaled_deviation
from .densities import DensityResult
from .phi import LatticeParams

__all__ = [
    "DENSITY_CSV_COLUMNS",
    "SAMPLE_CSV_COLUMNS",
    "FIT_CSV_COLUMNS",
    "serialize_result",
    "parse_result",
    "format_number",
    "sample_row",
    "ResultCache",
    "CACHE_ENV",
]

log = logging.getLogger(__name__)

CACHE_ENV = "LOOPDENS_CACHE"
DENSITY_CSV_COLUMNS = ("m", "n", "l", "mode", "digits", "nu_c", "nu_nc", "nu")
SAMPLE_CSV_COLUMNS = ("m", "n", "l", "s2", "nu", "scaled_deviation")
FIT_CSV_COLUMNS = ("m", "n", "alpha", "order", "a", "a_err", "b", "b_err",
                   "b_sequential", "residual_norm", "lmin", "lmax", "n_samples")


def format_number(x, digits: int | None = None) -> str:
    """Exact rationals as ``num/den``; floats in scientific notation.

    Formatting never consults the locale.
    """
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    if digits is None:
        return repr(float(x))
    with mpmath.workdps(digits):
        return mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False, min_fixed=1, max_fixed=0)


def _parse_number(text: str, digits: int | None):
    if digits is None:
        return Fraction(text)
    with mpmath.workdps(digits):
        return mpmath.mpf(text)


def _density_dict(r: DensityResult) -> dict:
    pr = r.params
    return {
        "m": pr.m,
        "n": pr.n,
        "l": pr.l,
        "mode": r.mode,
        "digits": r.digits,
        "nu_c": format_number(r.nu_c, r.digits),
        "nu_nc": format_number(r.nu_nc, r.digits),
        "nu": format_number(r.nu_total, r.digits),
    }


def _fit_row(f: FitResult) -> list:
    def fmt(x):
        return "" if x is None else repr(x)
    return [f.m, f.n, fmt(f.alpha), f.order, fmt(f.a), fmt(f.a_err), fmt(f.b), fmt(f.b_err),
            fmt(f.b_sequential), fmt(f.residual_norm), f.l_range[0], f.l_range[1], f.n_samples]


def sample_row(r: DensityResult) -> dict:
    """Row of the finite-size table: m, n, l, s2, nu, scaled deviation."""
    digits = r.digits or 50
    with mpmath.workdps(digits):
        dev = scaled_deviation(DensitySample(r.params, r.nu_total))
    return {
        "m": r.params.m,
        "n": r.params.n,
        "l": r.params.l,
        "s2": r.params.scaled_length_sq,
        "nu": format_number(r.nu_total, r.digits),
        "scaled_deviation": format_number(dev, min(digits, 30)),
    }


def serialize_result(result, fmt: str = "json") -> str:
    """Deterministic text form of a DensityResult, FitResult or AngleFit.

    CSV output is a single data row without header; the column order is
    DENSITY_CSV_COLUMNS or FIT_CSV_COLUMNS.
    """
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(result, DensityResult):
        d = _density_dict(result)
        if fmt == "json":
            return json.dumps(d)
        return ",".join("" if d[c] is None else str(d[c]) for c in DENSITY_CSV_COLUMNS)
    if isinstance(result, FitResult):
        if fmt == "json":
            return json.dumps(result.to_dict())
        return ",".join(str(x) for x in _fit_row(result))
    if isinstance(result, AngleFit):
        if fmt == "json":
            return json.dumps(result.to_dict())
        return "\n".join(f"{al!r},{a!r},{'' if b is None else repr(b)}" for al, a, b in result.table)
    raise TypeError(f"cannot serialize {type(result).__name__}")


def parse_result(text: str, fmt: str = "json") -> DensityResult:
    """Inverse of serialize_result for DensityResult."""
    if fmt == "json":
        d = json.loads(text)
    elif fmt == "csv":
        d = dict(zip(DENSITY_CSV_COLUMNS, text.strip().split(",")))
        d["digits"] = int(d["digits"]) if d["digits"] else None
    else:
        raise ValueError(f"unknown format {fmt!r}")
    digits = None if d["mode"] == "exact" else int(d["digits"])
    params = LatticeParams(int(d["m"]), int(d["n"]), int(d["l"]))
    return DensityResult(
        params,
        _parse_number(d["nu_c"], digits),
        _parse_number(d["nu_nc"], digits),
        _parse_number(d["nu"], digits),
        digits,
    )


def default_cache_path() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "loopdens" / "results.jsonl"


class ResultCache:
    """Line-delimited JSON store of DensityResults.

    Entries are keyed by ``(m, n, l, mode, digits)``.  A float request at
    ``d`` digits is served by the stored float entry with the most digits
    ``>= d``.  Unreadable lines are skipped with a warning.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else default_cache_path()
        self._entries: dict[tuple, str] = {}
        self._load()

    def _load(self):
        if not self.path.exists():
            return
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                    key = tuple(entry["key"])
                    value = entry["value"]
                    parse_result(value)
                except (ValueError, KeyError, TypeError) as exc:
                    log.warning("skipping corrupt cache line %d in %s: %s", lineno, self.path, exc)
                    continue
                self._entries[key] = value

    def lookup(self, params: LatticeParams, digits: int | None) -> str | None:
        """Serialized JSON of a matching DensityResult, or None."""
        base = (params.m, params.n, params.l)
        if digits is None:
            return self._entries.get(base + ("exact", None))
        best = None
        for key, value in self._entries.items():
            if key[:4] == base + ("float",) and key[4] >= digits:
                if best is None or key[4] > best[0]:
                    best = (key[4], value)
        return best[1] if best else None

    def store(self, result: DensityResult) -> str:
        text = serialize_result(result, "json")
        pr = result.params
        key = (pr.m, pr.n, pr.l, result.mode, result.digits)
        if key in self._entries:
            return self._entries[key]
        entry = {
            "key": list(key),
            "value": text,
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "tool_version": __version__,
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")
        self._entries[key] = text
        return text
