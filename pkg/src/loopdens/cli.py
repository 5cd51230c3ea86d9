"""Command-line interface: ``loopdens <subcommand> ...``.

Exit status is 0 on success, 1 when a computation fails and 2 on a usage
error.  Errors are written to stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import mpmath

from . import __version__
from .asymptotics import (
    DensitySample,
    angle_coefficients,
    default_window,
    fit_corrections,
)
from .densities import DensityResult, density_total, densities_from_pair
from .io import (
    DENSITY_CSV_COLUMNS,
    FIT_CSV_COLUMNS,
    SAMPLE_CSV_COLUMNS,
    ResultCache,
    parse_result,
    sample_row,
    serialize_result,
)
from .oracle import MAX_L, OracleConfig, leading_eigenvalue, free_energy, oracle_densities
from .phi import InvalidParams, LatticeParams, phi_coefficients
from .tq import solve_qp, verify_t, verify_wronskian

log = logging.getLogger("loopdens")

DEFAULT_FLOAT_DIGITS = 300
DEFAULT_PAIRS = "0,1;1,3;1,2;2,3;1,1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p, *, need_l=True, need_range=False, mode=True):
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    if need_l:
        p.add_argument("--l", type=int, required=True)
    if need_range:
        p.add_argument("--lmin", type=int)
        p.add_argument("--lmax", type=int)
    if mode:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--exact", action="store_true", help="exact rational arithmetic")
        g.add_argument("--digits", type=int, help="multiprecision with this many digits")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--cache", help="cache file (default: $LOOPDENS_CACHE or ~/.cache/loopdens)")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loopdens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _add_common(sub.add_parser("density", help="densities at one (m, n, l)"))
    _add_common(sub.add_parser("sweep", help="densities over a range of l"),
                need_l=False, need_range=True)

    p = sub.add_parser("fit", help="finite-size correction fit for one tilt")
    _add_common(p, need_l=False, need_range=True)
    p.add_argument("--order", type=int, choices=(1, 2), default=2)
    p.add_argument("--max-L", type=int, default=200)

    p = sub.add_parser("angles", help="a(alpha), b(alpha) over several tilts")
    p.add_argument("--pairs", default=DEFAULT_PAIRS, help="'m,n;m,n;...'")
    p.add_argument("--digits", type=int, default=DEFAULT_FLOAT_DIGITS)
    p.add_argument("--max-L", type=int, default=200)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--cache")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("oracle-check", help="exact densities vs transfer-matrix oracle")
    _add_common(p, mode=False)
    p.add_argument("--fd-step", type=float, default=1e-4)
    p.add_argument("--tol", type=float, default=1e-5)

    p = sub.add_parser("verify", help="Wronskian and T identities for solved pairs")
    _add_common(p)
    return parser


def _params(m, n, l) -> LatticeParams:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return LatticeParams(m, n, l)
    except InvalidParams as exc:
        raise UsageError(str(exc)) from exc


def _mode_digits(args, default=None):
    if getattr(args, "exact", False):
        return None
    if getattr(args, "digits", None) is not None:
        if args.digits < 16:
            raise UsageError("--digits must be at least 16")
        return args.digits
    return default


def _compute(task):
    m, n, l, digits = task
    return density_total(LatticeParams(m, n, l), digits)


class Runner:
    """Computes densities through the cache; cache writes happen only here."""

    def __init__(self, args):
        self.cache = None if getattr(args, "no_cache", False) else ResultCache(args.cache)
        self.jobs = max(1, getattr(args, "jobs", 1))

    def densities(self, params_list, digits) -> list[DensityResult]:
        out: dict[LatticeParams, DensityResult] = {}
        todo = []
        for pr in params_list:
            hit = self.cache.lookup(pr, digits) if self.cache else None
            if hit is not None:
                out[pr] = parse_result(hit)
            else:
                todo.append(pr)
        tasks = [(pr.m, pr.n, pr.l, digits) for pr in todo]
        if self.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(self.jobs) as ex:
                results = list(ex.map(_compute, tasks))
        else:
            results = [_compute(t) for t in tasks]
        for pr, res in zip(todo, results):
            if self.cache:
                # re-read from the serialized form so a later cache hit is byte-identical
                res = parse_result(self.cache.store(res))
            out[pr] = res
        return [out[pr] for pr in params_list]


def _lrange(args, m, n):
    lo, hi = default_window(m, n, getattr(args, "max_L", 200))
    lmin = args.lmin if args.lmin is not None else lo
    lmax = args.lmax if args.lmax is not None else hi
    if lmin > lmax:
        raise UsageError("--lmin must not exceed --lmax")
    ls = [l for l in range(lmin, lmax + 1) if l % 2 == 0]
    if not ls:
        raise UsageError("no even l in the requested range")
    for l in ls:
        _params(m, n, l)
    return ls


def _csv(header, rows):
    lines = [",".join(header)]
    lines += [",".join("" if v is None else str(v) for v in r) for r in rows]
    return "\n".join(lines)


def cmd_density(args):
    pr = _params(args.m, args.n, args.l)
    (res,) = Runner(args).densities([pr], _mode_digits(args))
    if args.format == "csv":
        return ",".join(DENSITY_CSV_COLUMNS) + "\n" + serialize_result(res, "csv")
    return serialize_result(res, "json")


def cmd_sweep(args):
    _params(args.m, args.n, 2)
    ls = _lrange(args, args.m, args.n)
    digits = _mode_digits(args, DEFAULT_FLOAT_DIGITS)
    results = Runner(args).densities([_params(args.m, args.n, l) for l in ls], digits)
    rows = [sample_row(r) for r in results]
    if args.format == "csv":
        return _csv(SAMPLE_CSV_COLUMNS, [[r[c] for c in SAMPLE_CSV_COLUMNS] for r in rows])
    return json.dumps([dict(json.loads(serialize_result(r)), **row) for r, row in zip(results, rows)])


def _fit_for(runner, m, n, ls, digits, order):
    results = runner.densities([_params(m, n, l) for l in ls], digits)
    prec = digits or 50
    with mpmath.workdps(prec):
        samples = [DensitySample(r.params, r.nu_total) for r in results]
        return fit_corrections(samples, order)


def cmd_fit(args):
    _params(args.m, args.n, 2)
    ls = _lrange(args, args.m, args.n)
    digits = _mode_digits(args, DEFAULT_FLOAT_DIGITS)
    fit = _fit_for(Runner(args), args.m, args.n, ls, digits, args.order)
    if args.format == "csv":
        return ",".join(FIT_CSV_COLUMNS) + "\n" + serialize_result(fit, "csv")
    return serialize_result(fit, "json")


def _parse_pairs(text):
    pairs = []
    try:
        for chunk in text.split(";"):
            m, n = (int(x) for x in chunk.split(","))
            _params(m, n, 2)
            pairs.append((m, n))
    except ValueError as exc:
        raise UsageError(f"bad --pairs value {text!r}") from exc
    return pairs


def cmd_angles(args):
    pairs = _parse_pairs(args.pairs)
    runner = Runner(args)
    fits = []
    for m, n in pairs:
        lo, hi = default_window(m, n, args.max_L)
        ls = list(range(lo, hi + 1, 2))
        fits.append(_fit_for(runner, m, n, ls, args.digits, 2))
    result = angle_coefficients(fits)
    if args.format == "csv":
        return "alpha,a,b\n" + serialize_result(result, "csv")
    doc = result.to_dict()
    doc["fits"] = [f.to_dict() for f in fits]
    return json.dumps(doc)


def cmd_oracle_check(args):
    pr = _params(args.m, args.n, args.l)
    if pr.L > MAX_L:
        raise UsageError(f"oracle needs L = l(m+n) <= {MAX_L}")
    (exact,) = Runner(args).densities([pr], None)
    cfg = OracleConfig(pr, fd_step=args.fd_step)
    with mpmath.workdps(cfg.digits):
        nu_c, nu_nc = oracle_densities(cfg)
        f = free_energy(cfg, leading_eigenvalue(cfg))
        d_c = abs(nu_c - mpmath.mpf(exact.nu_c.numerator) / exact.nu_c.denominator)
        d_nc = abs(nu_nc - mpmath.mpf(exact.nu_nc.numerator) / exact.nu_nc.denominator)
        d_f = abs(f - mpmath.log(2))
        ok = d_c < args.tol and d_nc < args.tol and d_f < 1e-10
        doc = {
            "m": pr.m, "n": pr.n, "l": pr.l,
            "nu_c_exact": str(exact.nu_c), "nu_nc_exact": str(exact.nu_nc),
            "nu_c_oracle": mpmath.nstr(nu_c, 15), "nu_nc_oracle": mpmath.nstr(nu_nc, 15),
            "delta_c": mpmath.nstr(d_c, 3), "delta_nc": mpmath.nstr(d_nc, 3),
            "free_energy_minus_log2": mpmath.nstr(d_f, 3),
            "pass": ok,
        }
    if args.format == "csv":
        cols = list(doc)
        return _csv(cols, [[doc[c] for c in cols]]), (0 if ok else 1)
    return json.dumps(doc), (0 if ok else 1)


def cmd_verify(args):
    pr = _params(args.m, args.n, args.l)
    digits = _mode_digits(args)
    pair = solve_qp(pr, digits)
    with pair.context():
        w_ok = verify_wronskian(pair)
        t_ok = verify_t(pair)
        const_ok = pair.Q(0) * pair.P(0) == phi_coefficients(pr)[0] if pair.exact else True
    res = densities_from_pair(pair)
    real_ok = res.exact is False or (0 < res.nu_nc <= res.nu_c < res.nu_total < 1)
    doc = {"m": pr.m, "n": pr.n, "l": pr.l, "backend": pair.backend,
           "wronskian": w_ok, "t_identity": t_ok, "q0p0_equals_phi0": const_ok,
           "density_range": bool(real_ok)}
    ok = all(v for k, v in doc.items() if isinstance(v, bool))
    doc["pass"] = ok
    if args.format == "csv":
        cols = list(doc)
        return _csv(cols, [[doc[c] for c in cols]]), (0 if ok else 1)
    return json.dumps(doc), (0 if ok else 1)


COMMANDS = {
    "density": cmd_density,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "angles": cmd_angles,
    "oracle-check": cmd_oracle_check,
    "verify": cmd_verify,
}


def run_command(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        out = COMMANDS[args.command](args)
    except UsageError as exc:
        stderr.write(json.dumps({"error": "usage", "message": str(exc)}) + "\n")
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - every failure maps to exit status 1
        stderr.write(json.dumps({"error": "computation", "type": type(exc).__name__,
                                 "message": str(exc)}) + "\n")
        return 1
    status = 0
    if isinstance(out, tuple):
        out, status = out
    stdout.write(out + "\n")
    return status


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
