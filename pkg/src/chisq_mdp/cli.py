"""Command-line experiment runner.

Usage::

    chisq-mdp <command> [--config FILE] [--out FILE] [--format csv|json]
                        [--threads K] [--seed U64]

Commands: ``simulate``, ``rate-curve``, ``check-conditions``, ``bounds``,
``verify``. Exit status is 0 on success, 1 when a verification or bound
check fails (or output cannot be written) and 2 for configuration errors.
See ``README.md`` for the configuration grammar.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import Any, Dict, List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bounds as bnd
from . import montecarlo as mc
from . import report
from . import verification
from .regimes import RegimeFamily, SchedulePoint, build_distribution, check_conditions, validate
from .sampling import check_seed

log = logging.getLogger("chisq_mdp")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    def __init__(self, key: str, msg: str):
        super().__init__(f"config error at '{key}': {msg}")
        self.key = key


def _get(cfg: Dict[str, Any], key: str, kind, default=..., prefix: str = ""):
    full = prefix + key
    if key not in cfg:
        if default is ...:
            raise ConfigError(full, "missing required key")
        return default
    value = cfg[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is list and not isinstance(value, list):
        value = [value]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(full, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _family(cfg: Dict[str, Any], key: str = "family") -> RegimeFamily:
    section = _get(cfg, key, dict, {"kind": "uniform"})
    unknown = set(section) - {"kind", "alpha", "gamma"}
    if unknown:
        raise ConfigError(f"{key}.{sorted(unknown)[0]}", "unknown key")
    try:
        return RegimeFamily(
            _get(section, "kind", str, prefix=key + "."),
            _get(section, "alpha", float, None, prefix=key + "."),
            _get(section, "gamma", float, None, prefix=key + "."),
        )
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def _points(cfg: Dict[str, Any]) -> List[SchedulePoint]:
    """Either an explicit ``[[points]]`` array or a ``[schedule]`` rule."""
    if "points" in cfg:
        raw = _get(cfg, "points", list)
        out = []
        for i, item in enumerate(raw):
            key = f"points[{i}]"
            if not isinstance(item, dict):
                raise ConfigError(key, "expected a table with n, m, b")
            try:
                out.append(SchedulePoint(
                    _get(item, "n", int, prefix=key + "."),
                    _get(item, "m", int, prefix=key + "."),
                    _get(item, "b", float, prefix=key + "."),
                ))
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
        if not out:
            raise ConfigError("points", "empty")
        return out
    if "schedule" in cfg:
        rule = _get(cfg, "schedule", dict)
        ns = _get(rule, "n", list, prefix="schedule.")
        m_pow = _get(rule, "m_power", float, prefix="schedule.")
        b_pow = _get(rule, "b_log_power", float, prefix="schedule.")
        try:
            return [schedule_point(int(n), m_pow, b_pow) for n in ns]
        except (ValueError, TypeError) as exc:
            raise ConfigError("schedule", str(exc)) from None
    raise ConfigError("points", "missing: give [[points]] or a [schedule] rule")


def schedule_point(n: int, m_power: float, b_log_power: float) -> SchedulePoint:
    """``m = ceil(n^m_power)``, ``b = (ln n)^b_log_power``."""
    m_real = n**m_power
    # guard against n^0.4 = 100.00000000000001 style rounding
    m = math.ceil(m_real - 1e-9 * m_real)
    return SchedulePoint(n, max(m, 2), math.log(n) ** b_log_power)


def _seed(cfg, args) -> int:
    seed = args.seed if args.seed is not None else _get(cfg, "seed", int)
    try:
        return check_seed(seed)
    except ValueError as exc:
        raise ConfigError("seed", str(exc)) from None


def _positive_int(cfg, key, default=..., prefix=""):
    value = _get(cfg, key, int, default, prefix=prefix)
    if value < 1:
        raise ConfigError(prefix + key, "must be >= 1")
    return value


def cmd_simulate(cfg, args):
    family, seed = _family(cfg), _seed(cfg, args)
    reps = _positive_int(cfg, "replicates")
    batch = _positive_int(cfg, "batch_size", mc.STREAM_BLOCK)
    thresholds = _get(cfg, "thresholds", list)
    rows = []
    for point in _points(cfg):
        try:
            sim = mc.SimConfig(point, family, reps, seed, tuple(thresholds), batch)
            sim.distribution
        except (ValueError, TypeError) as exc:
            raise ConfigError("thresholds/points", str(exc)) from None
        log.info("simulate n=%d m=%d b=%g", point.n, point.m, point.b)
        rows += [report.tail_row(sim, est) for est in mc.estimate_tail(sim, args.threads)]
    return rows, True


def cmd_rate_curve(cfg, args):
    family, seed = _family(cfg), _seed(cfg, args)
    reps = _positive_int(cfg, "replicates")
    batch = _positive_int(cfg, "batch_size", mc.STREAM_BLOCK)
    r = _get(cfg, "r", float)
    if not r > 0:
        raise ConfigError("r", "must be > 0")
    points = _points(cfg)
    for p in points:
        _check_buildable(family, p)
    curve = mc.rate_curve(points, family, r, reps, seed, args.threads, batch)
    return [report.rate_curve_row(family, seed, pt) for pt in curve], True


def _check_buildable(family, point):
    try:
        return build_distribution(family, point)
    except ValueError as exc:
        raise ConfigError("family", f"at n={point.n}, m={point.m}: {exc}") from None


def cmd_check_conditions(cfg, args):
    family = _family(cfg)
    rows = []
    for point in _points(cfg):
        dist = _check_buildable(family, point)
        rows.append(report.condition_row(point, family, dist, check_conditions(point, dist)))
    return rows, True


def cmd_bounds(cfg, args):
    seed = _seed(cfg, args)
    if "hoeffding" not in cfg and "hr" not in cfg:
        raise ConfigError("hoeffding", "need a [hoeffding] and/or [hr] section")
    rows = []
    if "hoeffding" in cfg:
        sec = _get(cfg, "hoeffding", dict)
        pre = "hoeffding."
        p = _get(sec, "p", float, 0.5, prefix=pre)
        if not 0 < p < 1:
            raise ConfigError(pre + "p", "must lie in (0, 1)")
        reps = _positive_int(sec, "replicates", prefix=pre)
        for n in _get(sec, "n", list, prefix=pre):
            for r in _get(sec, "r", list, prefix=pre):
                if not (isinstance(n, int) and n >= 1 and isinstance(r, (int, float)) and r > 0):
                    raise ConfigError(pre + "n/r", f"invalid pair n={n!r}, r={r!r}")
                chk = bnd.validate_hoeffding(n, float(r), reps, seed, p, args.threads)
                rows.append(_bound_row("hoeffding", f"bernoulli(p={p!r})", 2, n, float(r),
                                       None, None, seed, chk))
    if "hr" in cfg:
        sec = _get(cfg, "hr", dict)
        pre = "hr."
        family = _family(sec, "family")
        eps = _get(sec, "epsilon", float, 1.0, prefix=pre)
        exact = _get(sec, "exact", bool, True, prefix=pre)
        reps = _positive_int(sec, "replicates", prefix=pre)
        if reps < 1000 or eps <= 0:
            raise ConfigError(pre + "replicates/epsilon", "need replicates >= 1000 and epsilon > 0")
        for m in _get(sec, "m", list, prefix=pre):
            for k in _get(sec, "k", list, prefix=pre):
                if not (isinstance(m, int) and m >= 2 and isinstance(k, int) and k >= 3):
                    raise ConfigError(pre + "m/k", f"invalid pair m={m!r}, k={k!r}")
                dist = _check_buildable(family, SchedulePoint(k, m, 1.0))
                for u in _get(sec, "u", list, prefix=pre):
                    if not (isinstance(u, (int, float)) and u > 0):
                        raise ConfigError(pre + "u", f"must be > 0, got {u!r}")
                    chk = bnd.validate_hr_bound(dist, k, float(u), reps, seed, eps, exact, args.threads)
                    rows.append(_bound_row("houdre-reynaud", family.label, m, k, float(u),
                                           eps, exact, seed, chk))
    return rows, all(r["holds"] for r in rows)


def _bound_row(check, family, m, size, param, eps, exact, seed, chk) -> dict:
    return {
        "check": check, "family": family, "m": m, "size": size, "param": param,
        "epsilon": eps, "exact": exact, "seed": seed, "reps": chk.replicates,
        "threshold": chk.threshold, "bound": chk.bound, "empirical": chk.empirical,
        "stderr": chk.stderr, "holds": chk.holds(3.0),
    }


def cmd_verify(cfg, args):
    seed = args.seed if args.seed is not None else _get(cfg, "seed", int, 0)
    paths = _positive_int(cfg, "paths", 1000)
    dists = None
    if "distributions" in cfg:
        raw = _get(cfg, "distributions", list)
        try:
            dists = [validate(p) for p in raw]
        except (ValueError, TypeError) as exc:
            raise ConfigError("distributions", str(exc)) from None
    sizes = _get(cfg, "sizes", list, [1, 2, 3, 4])
    if not all(isinstance(n, int) and n >= 1 for n in sizes):
        raise ConfigError("sizes", "sample sizes must be integers >= 1")
    try:
        results = verification.run_all(dists, sizes=sizes, decomposition_paths=paths,
                                       seed=check_seed(seed))
    except mc.StateSpaceError as exc:
        raise ConfigError("distributions", str(exc)) from None
    rows = [{"identity": c.identity, "config": c.config, "max_error": c.max_error,
             "tolerance": c.tolerance, "passed": c.passed} for c in results]
    for c in results:
        log.info("%-22s %-40s max_error=%.3e tol=%.0e %s", c.identity, c.config,
                 c.max_error, c.tolerance, "ok" if c.passed else "FAIL")
    return rows, all(c.passed for c in results)


COMMANDS = {
    "simulate": cmd_simulate,
    "rate-curve": cmd_rate_curve,
    "check-conditions": cmd_check_conditions,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
}


def load_config(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("--config", f"malformed TOML: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment configuration")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads; never changes the output")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="chisq-mdp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.config is None and args.command != "verify":
            raise ConfigError("--config", f"required for '{args.command}'")
        cfg = load_config(args.config)
        fmt = args.format or _get(cfg, "format", str, "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError("format", f"must be csv or json, got {fmt!r}")
        rows, ok = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report.emit(rows, fmt, args.out, report.SCHEMAS[args.command])
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if not ok:
        print(f"{args.command}: one or more checks failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
