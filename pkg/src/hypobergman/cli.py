"""Command-line front end: ``python -m hypobergman <command> ...``.

Exit codes: 0 consistent / hyponormal / no disagreement, 1 a negative
witness, violated condition or disagreement, 2 usage error, 3 domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .bergman_op import numeric_hypo_test
from .criteria import (
    IFF_NOT_HYPONORMAL,
    NECESSARY_VIOLATED,
    check_normal,
    check_opposite_pair,
    check_single_term,
    check_two_term_necessary,
    check_two_term_sufficient,
)
from .errors import DomainError, HypothesisError, SamplingBudgetError, ShapeError
from .moments import WAlphaConfig, check_alpha, lambda_p, lambda_pq, w_alpha
from .symbols import Circulant, Convention, circulant_row_of, parse_symbol, symbol_to_json
from .verify import CRITERIA, FAMILIES, InstanceSpec, cross_validate

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULTS = {
    "alpha": 0.0,
    "n_max": 30,
    "tol": 1e-10,
    "convention": "ct",
    "output": "json",
    "seed": 0,
    "symbol": None,
}

EXIT_OK, EXIT_FOUND, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3
SWEEP_HEADER = ["alpha", "b", "oracle_status", "min_eigenvalue", "scale", "criteria"]


class UsageError(Exception):
    pass


# -- configuration -------------------------------------------------------------


def load_config_file(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if str(path).endswith(".toml"):
        data = tomllib.loads(raw.decode())
    else:
        data = json.loads(raw)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a table/object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def effective_config(args):
    """Merge flags over the config file over defaults."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            cfg.update(load_config_file(args.config))
        except (OSError, ValueError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["alpha"] = float(cfg["alpha"])
    cfg["n_max"] = int(cfg["n_max"])
    cfg["tol"] = float(cfg["tol"])
    cfg["seed"] = int(cfg["seed"])
    try:
        cfg["convention"] = Convention.parse(cfg["convention"]).value
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg["output"] not in ("json", "csv", "pretty"):
        raise UsageError(f"unknown output format {cfg['output']!r}")
    if cfg["n_max"] < 0 or not cfg["tol"] > 0:
        raise UsageError("need --n-max >= 0 and --tol > 0")
    return cfg


# -- output ------------------------------------------------------------------------


def _flat(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def emit(obj, fmt, out):
    if fmt == "json":
        out.write(json.dumps(obj, sort_keys=True) + "\n")
    elif fmt == "pretty":
        out.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    else:
        flat = _flat(obj)
        out.write(_csv([flat], list(flat)))


# -- shape detection -------------------------------------------------------------


def _coeff_view(M):
    row = circulant_row_of(M, 1e-12 * max(float(np.abs(M).max(initial=0.0)), 1e-300))
    return Circulant(row) if row is not None else None


def _scalar_identity(M):
    n = M.shape[0]
    return complex(M[0, 0]) if np.allclose(M, M[0, 0] * np.eye(n), rtol=0, atol=1e-14) else None


def applicable_criteria(phi, alpha, tol):
    """Verdicts of every criterion whose shape matches ``phi``; ``(verdicts, shape)``."""
    ts = phi.terms
    out = []

    def add(fn):
        try:
            out.append(fn())
        except (HypothesisError, ShapeError):
            pass

    if all(t.p == t.q for t in ts) and len(ts) <= 2:
        add(lambda: check_normal(phi, tol))
    if len(ts) == 1:
        (t,) = ts
        add(lambda: check_single_term(t.coeff, t.p, t.q, tol))
        circ = _coeff_view(t.coeff)
        if circ is not None and phi.n > 1:
            add(lambda: check_single_term(circ, t.p, t.q, tol))
        return out, "single-term"
    if len(ts) != 2:
        return out, "unsupported"
    a, b = ts
    ca, cb = _coeff_view(a.coeff), _coeff_view(b.coeff)
    both_circ = ca is not None and cb is not None and phi.n > 1
    if a.shift == b.shift:
        if a.shift > 0:
            add(lambda: check_two_term_sufficient(a.coeff, b.coeff, a.p, a.q, b.p, b.q, tol))
            if both_circ:
                add(lambda: check_two_term_sufficient(ca, cb, a.p, a.q, b.p, b.q, tol))
        return out, "two-term-same-orientation"
    if a.shift == -b.shift:
        if a.shift < 0:
            a, b, ca, cb = b, a, cb, ca
        A, B = (ca, cb) if both_circ else (a.coeff, b.coeff)
        add(lambda: check_two_term_necessary(A, B, a.p, a.q, b.p, b.q, alpha, tol=tol))
        if (b.p, b.q) == (a.q, a.p):
            sa, sb = _scalar_identity(a.coeff), _scalar_identity(b.coeff)
            if sa is not None and sb is not None:
                add(lambda: check_opposite_pair(sa, sb, a.p, a.q, tol))
            elif both_circ:
                add(lambda: check_opposite_pair(ca, cb, a.p, a.q, tol))
            return out, "opposite-pair"
        return out, "two-term-mixed"
    return out, "unsupported"


def _verdict_exit(verdicts):
    bad = {IFF_NOT_HYPONORMAL, NECESSARY_VIOLATED}
    return EXIT_FOUND if any(v.hypothesis_ok and v.kind in bad for v in verdicts) else EXIT_OK


def _read_symbol(args, cfg):
    text = getattr(args, "symbol", None) or cfg.get("symbol")
    if getattr(args, "symbol_file", None):
        with open(args.symbol_file) as fh:
            text = fh.read()
    if text is None:
        raise UsageError("a symbol is required (--symbol or --symbol-file)")
    try:
        return parse_symbol(text if isinstance(text, (str, dict)) else json.dumps(text))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"malformed symbol: {exc}") from None


# -- commands --------------------------------------------------------------------


def cmd_moments(args, cfg, out):
    alpha = check_alpha(cfg["alpha"])
    res = {"lambda_p": lambda_p(alpha, args.p)}
    if args.q is not None:
        res["lambda_pq"] = lambda_pq(alpha, args.p, args.q)
    if args.t is not None or args.s is not None:
        if args.q is None or args.t is None or args.s is None:
            raise UsageError("w_alpha needs --p --q --t --s")
        wcfg = WAlphaConfig(i_max=args.i_max, tail_probe=args.tail_probe)
        res["w_alpha"] = w_alpha(alpha, args.p, args.q, args.t, args.s, wcfg).to_dict()
    emit(res, cfg["output"], out)
    return EXIT_OK


def cmd_check(args, cfg, out):
    phi = _read_symbol(args, cfg)
    alpha = check_alpha(cfg["alpha"])
    verdict = numeric_hypo_test(alpha, phi, cfg["n_max"], cfg["tol"], cfg["convention"])
    crit, shape = applicable_criteria(phi, alpha, cfg["tol"])
    report = {
        "oracle": verdict.to_dict(),
        "shape": shape,
        "criteria": [v.to_dict() for v in crit],
        "config": {**cfg, "symbol": symbol_to_json(phi)},
    }
    if not crit:
        report["note"] = "no criterion applies to this shape; oracle only"
    if verdict.witness is not None:
        report["oracle"]["witness_rayleigh"] = verdict.min_eigenvalue
    emit(report, cfg["output"], out)
    return EXIT_FOUND if verdict.not_hyponormal else EXIT_OK


def cmd_criteria(args, cfg, out):
    phi = _read_symbol(args, cfg)
    alpha = check_alpha(cfg["alpha"])
    crit, shape = applicable_criteria(phi, alpha, cfg["tol"])
    if args.criterion:
        if args.criterion not in CRITERIA:
            raise UsageError(f"unknown criterion {args.criterion!r}; choose from {sorted(CRITERIA)}")
        crit = [v for v in crit if v.criterion == args.criterion]
    report = {"shape": shape, "criteria": [v.to_dict() for v in crit], "config": {**cfg, "symbol": symbol_to_json(phi)}}
    if not crit:
        report["note"] = "no criterion applies to this shape"
    emit(report, cfg["output"], out)
    return _verdict_exit(crit)


def _parse_grid(text, name):
    if text is None:
        return None
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return [float(x) for x in np.linspace(float(start), float(stop), int(num))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse --{name} {text!r}") from None


def cmd_sweep(args, cfg, out):
    phi = _read_symbol(args, cfg)
    alphas = _parse_grid(args.alphas, "alphas")
    alphas = [cfg["alpha"]] if alphas is None else alphas
    bs = _parse_grid(args.b, "b")
    if bs is not None and not 0 <= args.scale_term < len(phi.terms):
        raise UsageError(f"--scale-term must index one of {len(phi.terms)} terms")
    grid = [(a, b) for a in sorted(alphas) for b in (sorted(bs) if bs is not None else [None])]
    if not alphas or (bs is not None and not bs):
        raise UsageError("empty grid")
    for a, _ in grid:
        check_alpha(a)
    rows = []
    for a, b in grid:
        sym = phi if b is None else phi.scaled_term(args.scale_term, b)
        v = numeric_hypo_test(a, sym, cfg["n_max"], cfg["tol"], cfg["convention"])
        crit, _ = applicable_criteria(sym, a, cfg["tol"])
        rows.append(
            {
                "alpha": a,
                "b": b if b is not None else "",
                "oracle_status": v.status,
                "min_eigenvalue": v.min_eigenvalue,
                "scale": v.scale,
                "criteria": ";".join(f"{c.criterion}={c.kind}" for c in crit),
            }
        )
    if cfg["output"] == "csv":
        out.write(_csv(rows, SWEEP_HEADER))
    else:
        emit({"rows": rows, "config": {**cfg, "symbol": symbol_to_json(phi)}}, cfg["output"], out)
    return EXIT_OK


def cmd_verify(args, cfg, out):
    if args.criterion not in CRITERIA:
        raise UsageError(f"unknown criterion {args.criterion!r}; choose from {sorted(CRITERIA)}")
    family = args.family or CRITERIA[args.criterion][1]
    if family not in FAMILIES:
        raise UsageError(f"unknown family {family!r}")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    try:
        spec = InstanceSpec(
            family,
            n=args.n,
            max_exp=args.max_exp,
            orientation=args.orientation,
            target=args.target,
            seed=cfg["seed"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = cross_validate(args.criterion, spec, args.trials, cfg["n_max"], cfg["tol"], cfg["convention"])
    report = rep.to_dict()
    report["config"]["run"] = {k: v for k, v in cfg.items() if k != "symbol"}
    if cfg["output"] == "csv":
        out.write(_csv(report["disagreements"], ["seed", "criterion_kind", "oracle_status", "min_eig"]))
    else:
        emit(report, cfg["output"], out)
    return EXIT_OK if not rep.disagreements else EXIT_FOUND


# -- parser ------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("global options")
    g.add_argument("--alpha", type=float, help="weight parameter, must exceed -1 (default 0)")
    g.add_argument("--n-max", dest="n_max", type=int, help="largest truncation degree (default 30)")
    g.add_argument("--tol", type=float, help="relative eigenvalue tolerance (default 1e-10)")
    g.add_argument(
        "--convention",
        choices=["ct", "ew", "conjugate-transpose", "entrywise", "entrywise-conjugate"],
        help="adjoint convention for the oracle (default ct)",
    )
    g.add_argument("--output", choices=["json", "csv", "pretty"], help="output format (default json)")
    g.add_argument("--seed", type=int, help="base seed for random instances (default 0)")
    g.add_argument("--config", metavar="PATH", help="JSON or TOML file with defaults for these options")

    parser = argparse.ArgumentParser(
        prog="hypobergman",
        description="Hyponormality checks for block Toeplitz operators with monomial symbols.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", parents=[common], help="moment values and the W supremum")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--i-max", dest="i_max", type=int, default=WAlphaConfig.i_max)
    p.add_argument("--tail-probe", dest="tail_probe", type=int, default=WAlphaConfig.tail_probe)
    p.set_defaults(func=cmd_moments)

    for name, func, hlp in (
        ("check", cmd_check, "spectral oracle plus applicable criteria"),
        ("criteria", cmd_criteria, "applicable closed-form criteria only"),
        ("sweep", cmd_sweep, "oracle and criteria over a parameter grid"),
    ):
        c = sub.add_parser(name, parents=[common], help=hlp)
        c.add_argument("--symbol", help="symbol literal (JSON)")
        c.add_argument("--symbol-file", dest="symbol_file", help="file holding the symbol literal")
        c.set_defaults(func=func)
        if name == "criteria":
            c.add_argument("--criterion", help="restrict to one criterion id")
        if name == "sweep":
            c.add_argument("--scale-term", dest="scale_term", type=int, default=1, help="term scaled by b (default 1)")
            c.add_argument("--b", help="b values: 'v1,v2,...' or 'start:stop:num'")
            c.add_argument("--alphas", help="alpha values: 'v1,v2,...' or 'start:stop:num'")

    v = sub.add_parser("verify", parents=[common], help="randomized cross-validation against the oracle")
    v.add_argument("--criterion", required=True, help=f"one of {', '.join(sorted(CRITERIA))}")
    v.add_argument("--family", help="instance family (default depends on the criterion)")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--n", type=int, default=2, help="block size")
    v.add_argument("--max-exp", dest="max_exp", type=int, default=8)
    v.add_argument("--orientation", choices=["ge", "lt", "any"], default="any")
    v.add_argument("--target", choices=["satisfy", "violate", "any"], default="satisfy")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = effective_config(args)
        return args.func(args, cfg, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (HypothesisError, SamplingBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
