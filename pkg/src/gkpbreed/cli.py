"""Command-line front end.

    gkpbreed eval theta --k 0 --y 0 --gamma 1
    gkpbreed repro fig2 --n 7-40 --workers 8 --out-dir out --cache-dir cache
    gkpbreed validate all

Exit codes: 0 success, 2 validation failure, 3 partial sweep failure,
4 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import mpmath as mp

from . import __version__
from .errors import GKPBreedError
from .numerics import PrecisionContext, using

EXIT_OK, EXIT_VALIDATION, EXIT_PARTIAL, EXIT_USAGE = 0, 2, 3, 4
CSV_DIGITS = 25
FIGURES = ("fig2", "fig3", "figA2", "fig4", "fig5")
SUITES = ("numerics", "breeding", "exact", "povm", "gk")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    precision_bits: int = 256
    workers: int = 1
    n_range: list = field(default_factory=lambda: list(range(7, 41)))
    p_grid: list = field(default_factory=lambda: [0.0, 1.0, 2.0])  # multiples of √π
    epsilon_grid: list = field(default_factory=lambda: [round(0.01 * k, 2) for k in range(1, 31)])
    upsilon: list = field(default_factory=list)  # empty: the 10 dB GKP no-error probability
    xi_box: list = field(default_factory=lambda: [0.3, 1.5])
    rd_box: list = field(default_factory=lambda: [0.0, 3.0])
    grid_step: float = 0.05
    out_dir: str = "out"
    cache_dir: str | None = None
    format: str = "csv"

    def validate(self):
        try:
            PrecisionContext(int(self.precision_bits))
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from None
        if int(self.workers) < 1:
            raise UsageError("workers must be >= 1")
        if not self.n_range or any(int(n) != n or n < 7 for n in self.n_range):
            raise UsageError("n values must be integers >= 7")
        if any(not 0 < float(e) for e in self.epsilon_grid):
            raise UsageError("epsilon values must be positive")
        if any(not 0 < float(u) < 1 for u in self.upsilon):
            raise UsageError("upsilon values must lie in (0, 1)")
        if float(self.grid_step) <= 0:
            raise UsageError("grid_step must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        return self


def parse_n(text: str) -> list:
    """'7-40', '7,10,15' or '30'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
    overrides = {
        "precision_bits": getattr(args, "precision_bits", None),
        "workers": getattr(args, "workers", None),
        "out_dir": getattr(args, "out_dir", None),
        "cache_dir": getattr(args, "cache_dir", None),
        "format": getattr(args, "format", None),
    }
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    if getattr(args, "n", None):
        cfg.n_range = parse_n(args.n)
    if getattr(args, "upsilon", None):
        cfg.upsilon = [float(u) for u in args.upsilon]
    return cfg.validate()


# ---------------------------------------------------------------------------
# output


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (mp.mpf, float)):
        return mp.nstr(mp.mpf(value), CSV_DIGITS, strip_zeros=False) if mp.isfinite(value) else str(value)
    return str(value)


def write_table(path: Path, columns, rows, cfg: RunConfig, fmt_name: str):
    from .pipeline import atomic_write

    header = {"format_version": 1, "code_version": __version__, "config": asdict(cfg)}
    if fmt_name == "json":
        body = {**header, "columns": list(columns), "rows": [[fmt(v) for v in r] for r in rows]}
        atomic_write(path.with_suffix(".json"), json.dumps(body, indent=1, sort_keys=True))
        return path.with_suffix(".json")
    buf = io.StringIO()
    buf.write(f"# format_version=1 code_version={__version__}\n")
    buf.write("# config=" + json.dumps(asdict(cfg), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    atomic_write(path.with_suffix(".csv"), buf.getvalue())
    return path.with_suffix(".csv")


# ---------------------------------------------------------------------------
# eval


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"eval {args.expr} needs --{' --'.join(missing)}")


def cmd_eval(args) -> int:
    from . import breeding_approx as ba
    from . import metrics, numerics, states, waves

    cfg = load_config(args)
    with using(PrecisionContext(cfg.precision_bits)):
        e = args.expr
        if e == "theta":
            _need(args, "k", "y", "gamma")
            value = numerics.theta(args.k, mp.mpf(args.y), mp.mpf(args.gamma))
        elif e == "gps":
            _need(args, "n")
            wave = states.gps_wave(int(args.n))
            value = mp.sqrt(waves.norm2(wave)) if args.norm else wave(mp.mpf(args.q or 0))
        elif e == "breed":
            _need(args, "n", "p")
            out = ba.breed_wave(int(args.n), mp.mpf(args.p))
            value = mp.sqrt(waves.norm2(out.wave)) if args.norm else out.wave(mp.mpf(args.q or 0))
        elif e == "homodyne":
            _need(args, "n", "p")
            value = ba.homodyne_density(int(args.n), mp.mpf(args.p))
        elif e == "gfn":
            _need(args, "n", "p")
            value = ba.g_fn(int(args.n), mp.mpf(args.p))
        elif e == "delta":
            _need(args, "n", "p")
            value = ba.corrective_delta(int(args.n), mp.mpf(args.p)).delta
        elif e == "gk":
            if args.db is not None:
                wave = states.gkp_wave(states.db_to_xi(args.db))
            else:
                _need(args, "n", "p")
                d = ba.corrective_delta(int(args.n), mp.mpf(args.p)).delta
                wave = ba.displaced_wave(int(args.n), mp.mpf(args.p), d)
            value = mp.mpf(metrics.gk_no_error(wave).value)
        else:  # argparse restricts choices
            raise UsageError(f"unknown expression {e}")
        if isinstance(value, mp.mpc) and value.imag == 0:
            value = value.real
        digits = int(cfg.precision_bits * 0.30103)
        text = mp.nstr(value, min(digits, 40))
        if cfg.format == "json":
            print(json.dumps({"expr": e, "value": text, "mantissa_bits": cfg.precision_bits}))
        else:
            print(f"{e} = {text}  (mantissa_bits={cfg.precision_bits})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# repro


def _cells(fig: str, cfg: RunConfig):
    if fig == "fig2":
        return "postselect", [{"n": n} for n in cfg.n_range]
    if fig == "fig3":
        ups = cfg.upsilon
        if not ups:
            from .pipeline import wt_threshold

            with using(PrecisionContext(cfg.precision_bits)):
                ups = [float(wt_threshold(10))]
        return "wt", [{"n": n, "upsilon": u, "grid_step": cfg.grid_step} for n in cfg.n_range for u in ups]
    if fig == "figA2":
        return "exact_compare", [{"n": n} for n in cfg.n_range]
    if fig == "fig4":
        return "povm", [
            {"n": n, "source": "exact", "p_units": p, "epsilon": e}
            for n in cfg.n_range
            for p in cfg.p_grid
            for e in cfg.epsilon_grid
        ]
    if fig == "fig5":
        return "povm", [
            {"n": n, "source": "approx", "p_units": p, "epsilon": e}
            for n in cfg.n_range
            for p in cfg.p_grid
            for e in cfg.epsilon_grid
        ]
    raise UsageError(f"unknown figure {fig}")


SCHEMAS = {
    "fig2": ("n", "xi_opt", "r_d_opt", "fidelity", "P_total", "gk_no_error"),
    "fig3": ("n", "upsilon", "P_upsilon", "P_WT"),
    "figA2": ("n", "fidelity", "kl_divergence"),
    "fig4": ("n", "p_tilde", "epsilon", "fidelity", "window_probability"),
    "fig5": ("n", "p_tilde", "epsilon", "fidelity", "window_probability"),
}


def _row(fig, rec):
    if fig == "fig2":
        return (rec.n, rec.xi_opt, rec.r_d_opt, rec.fidelity, rec.P_Total, rec.gk_no_error)
    if fig == "fig3":
        return (rec.n, rec.upsilon, rec.P_upsilon, rec.P_WT)
    if fig == "figA2":
        return (rec.n, rec.fidelity, rec.kl)
    return (rec.n, rec.p_tilde, rec.epsilon, rec.fidelity, rec.probability)


# default cells when no --n or --config narrows the run
_FIG_DEFAULTS = {
    "figA2": {"n_range": [7, 10, 15, 20, 30, 40]},
    "fig4": {"n_range": [10, 40]},
    "fig5": {"n_range": [8], "p_grid": [0.0]},
}


def cmd_repro(args) -> int:
    from .pipeline import SweepCache, SweepSpec, atomic_write, run_sweep

    cfg = load_config(args)
    if not args.n and not args.config:
        for k, v in _FIG_DEFAULTS.get(args.figure, {}).items():
            setattr(cfg, k, v)
    op, cells = _cells(args.figure, cfg)
    cache = SweepCache(cfg.cache_dir) if cfg.cache_dir else None
    t0 = time.time()
    results = run_sweep(SweepSpec(op, tuple(cells), cfg.precision_bits), cache=cache, workers=cfg.workers)
    wall = time.time() - t0
    rows = [_row(args.figure, c.record) for c in results if c.record is not None]
    failures = [{"params": c.params, "error": c.error} for c in results if c.record is None]
    out_dir = Path(cfg.out_dir)
    table = write_table(out_dir / args.figure, SCHEMAS[args.figure], rows, cfg, cfg.format)
    manifest = {
        "format_version": 1,
        "code_version": __version__,
        "figure": args.figure,
        "operation": op,
        "inputs": cells,
        "config": asdict(cfg),
        "mantissa_bits": cfg.precision_bits,
        "wall_time_s": round(wall, 3),
        "cells": len(results),
        "cache_hits": sum(1 for c in results if c.cached),
        "failures": failures,
        "output": table.name,
    }
    atomic_write(out_dir / f"{args.figure}_manifest.json", json.dumps(manifest, indent=1, sort_keys=True))
    print(f"wrote {table} ({len(rows)} rows, {len(failures)} failed, {wall:.1f} s)")
    for f in failures:
        print(f"cell failed: {json.dumps(f)}", file=sys.stderr)
    if failures and len(failures) > 0.1 * len(results):
        return EXIT_PARTIAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    from . import validation

    cfg = load_config(args)
    suites = SUITES if args.suite == "all" else (args.suite,)
    failed = 0
    with using(PrecisionContext(cfg.precision_bits)):
        for suite in suites:
            for check in validation.run_suite(suite):
                print(check.line())
                failed += not check.passed
    print(f"{'FAIL' if failed else 'PASS'}: {failed} failing check(s)")
    return EXIT_VALIDATION if failed else EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p):
    p.add_argument("--config", help="JSON file mirroring RunConfig")
    p.add_argument("--precision-bits", type=int, dest="precision_bits")
    p.add_argument("--workers", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--n", help="photon number(s): 30, 7-40 or 7,10,15")
    p.add_argument("--upsilon", type=float, nargs="+")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gkpbreed", description="GKP state generation by breeding GPS states")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    ev = sub.add_parser("eval", help="evaluate one quantity")
    ev.add_argument("expr", choices=("theta", "gps", "breed", "homodyne", "gfn", "delta", "gk"))
    _common(ev)
    ev.add_argument("--p", type=str)
    ev.add_argument("--q", type=str, help="position for wave-function values")
    ev.add_argument("--k", type=int)
    ev.add_argument("--y", type=str)
    ev.add_argument("--gamma", type=str)
    ev.add_argument("--db", type=float, help="GKP squeezing in dB (eval gk)")
    ev.add_argument("--norm", action="store_true", help="print the state norm")
    ev.set_defaults(func=cmd_eval)

    rp = sub.add_parser("repro", help="regenerate the data behind a figure")
    rp.add_argument("figure", choices=FIGURES)
    _common(rp)
    rp.add_argument("--p", type=str, help="unused; accepted for symmetry")
    rp.set_defaults(func=cmd_repro)

    va = sub.add_parser("validate", help="run an invariant suite")
    va.add_argument("suite", choices=SUITES + ("all",))
    _common(va)
    va.add_argument("--p", type=str)
    va.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a subcommand is required (eval, repro, validate)")
        return args.func(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GKPBreedError, ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else 1


if __name__ == "__main__":
    raise SystemExit(main())
