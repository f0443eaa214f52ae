"""Command-line front end: single-point computations, sweeps, CSV emission.

Exit codes: 0 success, 1 numeric-validation failure (the offending quantity
is named on stderr), 2 usage errors.  Options may also be supplied through
a key=value config file via --config; explicit flags win.

The sweep CSV schema is fixed:

    sweep_var,N,nS,nD,gammaS,gammaD,C1,C2,C3,C4,sigmaN,regime

with sweep_var holding the swept variable's value per row, floats printed
with 17 significant digits, rows ordered by (N, sweep value), and fields
left empty for outputs that were not requested.  Identical invocations
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analytics, engine, fluctuation, fullspace, transient
from .errors import FcsError
from .model import SystemParams, effective_occupation, thermal_occupation

CSV_COLUMNS = (
    "sweep_var",
    "N",
    "nS",
    "nD",
    "gammaS",
    "gammaD",
    "C1",
    "C2",
    "C3",
    "C4",
    "sigmaN",
    "regime",
)
SWEEP_VARIABLES = ("nS", "nD", "N", "gammaS", "gammaD", "TS", "TD")
DEFAULT_OUTPUTS = ("C1", "C2", "C3", "C4", "sigmaN", "regime")


def _nonneg(text: str) -> float:
    value = float(text)
    if value < 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text}")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if value <= 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be a finite number > 0, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be an integer >= 1, got {text}")
    return value


def _grid_points(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("a sweep grid needs at least 2 points")
    return value


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text}") from exc
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("atom counts must be integers >= 1")
    return values


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def emit_csv(rows: list[dict], path: str) -> None:
    """Write sweep rows in the fixed schema; deterministic byte-for-byte."""
    if not rows:
        raise ValueError("refusing to write an empty sweep")
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
    except OSError as exc:
        raise FcsError(f"cannot write CSV to {path}: {exc}") from exc


def _scenario(args, n_atoms=None) -> SystemParams:
    return SystemParams.source_drain(
        n_atoms if n_atoms is not None else args.N,
        args.gammaS,
        args.nS,
        args.gammaD,
        args.nD,
        omega=args.omega,
    )


def _sweep_point(task: tuple) -> dict:
    """One sweep grid point; module-level so process pools can pickle it."""
    (value, n_atoms, n_s, n_d, g_s, g_d, omega, method, outputs) = task
    params = SystemParams.source_drain(n_atoms, g_s, n_s, g_d, n_d, omega=omega)
    row = {
        "sweep_var": value,
        "N": n_atoms,
        "nS": n_s,
        "nD": n_d,
        "gammaS": g_s,
        "gammaD": g_d,
    }
    wanted_orders = tuple(k for k in (1, 2, 3, 4) if f"C{k}" in outputs)
    if wanted_orders:
        if method == "eig":
            cums = engine.cumulants_eigenvalue(params, orders=wanted_orders)
        else:
            cums = engine.cumulants_resolvent(params, orders=wanted_orders)
        for k in wanted_orders:
            row[f"C{k}"] = cums[k]
    n_m = effective_occupation(params).occupation
    if "sigmaN" in outputs:
        row["sigmaN"] = analytics.sigma_n(n_atoms, n_m)
    if "regime" in outputs:
        row["regime"] = analytics.classify_regime(n_atoms, n_m)
    return row


def _grid(args) -> np.ndarray:
    if args.log is not None:
        lo, hi = args.log
        if lo <= 0 or hi <= 0:
            raise argparse.ArgumentTypeError("logarithmic grids need positive endpoints")
        return np.geomspace(lo, hi, args.points)
    lo, hi = args.lin
    return np.linspace(lo, hi, args.points)


def _cmd_sweep(args) -> int:
    grid = _grid(args)
    outputs = tuple(args.outputs.split(","))
    unknown = set(outputs) - set(DEFAULT_OUTPUTS)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown outputs {sorted(unknown)}")
    tasks = []
    if args.var == "N":
        sizes = sorted({max(1, int(round(v))) for v in grid})
        for n_atoms in sizes:
            tasks.append(
                (n_atoms, n_atoms, args.nS, args.nD, args.gammaS, args.gammaD, args.omega, args.method, outputs)
            )
    else:
        for n_atoms in args.N:
            for value in grid:
                n_s, n_d, g_s, g_d = args.nS, args.nD, args.gammaS, args.gammaD
                if args.var == "nS":
                    n_s = value
                elif args.var == "nD":
                    n_d = value
                elif args.var == "gammaS":
                    g_s = value
                elif args.var == "gammaD":
                    g_d = value
                elif args.var == "TS":
                    n_s = thermal_occupation(1.0 / value, args.omega)
                elif args.var == "TD":
                    n_d = thermal_occupation(1.0 / value, args.omega)
                tasks.append((value, n_atoms, n_s, n_d, g_s, g_d, args.omega, args.method, outputs))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: (r["N"], r["sweep_var"]))
    if args.out:
        emit_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
    return 0


def _cmd_current(args) -> int:
    params = _scenario(args)
    closed = analytics.current_closed_form(params)
    numeric = engine.current_numeric(params)
    rel = abs(closed - numeric) / max(abs(closed), abs(numeric), 1e-300)
    print(f"I_N (closed form) = {closed:.15g}")
    print(f"I_N (numeric)     = {numeric:.15g}")
    print(f"relative difference = {rel:.3e}")
    if rel > 1e-8:
        print("FAIL: closed-form current and numeric current disagree", file=sys.stderr)
        return 1
    return 0


def _cmd_cumulants(args) -> int:
    params = _scenario(args)
    orders = tuple(int(k) for k in args.orders.split(","))
    if args.method in ("res", "both"):
        res = engine.cumulants_resolvent(params, orders=orders)
        for k in orders:
            print(f"C{k} (resolvent)  = {res[k]:.15g}   S{k} = {res.shifts[k]:.15g}")
    if args.method in ("eig", "both"):
        eig = engine.cumulants_eigenvalue(params, orders=orders)
        for k in orders:
            print(f"C{k} (eigenvalue) = {eig[k]:.15g}   (err ~ {eig.errors[k]:.1e})")
    if args.method == "both":
        scale = max(abs(res[k]) for k in orders)
        worst = max(abs(res[k] - eig[k]) / max(abs(res[k]), 1e-9 * scale) for k in orders)
        print(f"max method discrepancy = {worst:.3e}")
        if worst > engine.METHOD_AGREEMENT_TOL:
            print("FAIL: cumulant methods disagree", file=sys.stderr)
            return 1
    return 0


def _cmd_transient(args) -> int:
    params = SystemParams.single_bath(args.N, args.gamma, args.nB, omega=args.omega)
    times = np.linspace(0.0, args.tmax, args.points)
    if args.kind == "flash":
        rates = transient.flash_rate(params, times)
        rows = zip(times, rates)
        header = ("t", "rate")
    else:
        state = transient.initial_n_resolved(args.N, "excited")
        state = transient.propagate_n_resolved(state, params, args.tmax, counted="single")
        ns, probs = transient.pn_distribution(state)
        rows = zip(ns, probs)
        header = ("n", "P")
    sink = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(header)
        for a, b in rows:
            writer.writerow([_fmt(a), _fmt(b)])
    finally:
        if args.out:
            sink.close()
            print(f"wrote {args.kind} data to {args.out}")
    return 0


def _cmd_equilibrium(args) -> int:
    for k in (1, 2, 3, 4):
        value = analytics.equilibrium_moments(args.N, args.betaOmega, k)
        print(f"<n^{k}>  = {value:.15g}")
    c1, c2, c3, c4 = analytics.equilibrium_cumulants_high_t(args.N)
    print(f"high-temperature cumulants: {c1:.15g}, {c2:.15g}, {c3:.15g}, {c4:.15g}")
    return 0


def _cmd_verify_ft(args) -> int:
    n_s = thermal_occupation(args.betaS, args.omega)
    n_d = thermal_occupation(args.betaD, args.omega)
    params = SystemParams.source_drain(args.N, args.gamma, n_s, args.gamma, n_d, omega=args.omega)
    sym = fluctuation.symmetry_check(params)
    print(f"affinity (drain counting)   = {sym.affinity:.12g}")
    print(f"thermal affinity            = {sym.thermal_affinity:.12g}")
    print(f"char-poly symmetry violation = {sym.max_violation:.3e}")
    ft = fluctuation.fluctuation_theorem_check(params, args.t, args.nmax)
    print(f"log-ratio slope (source counting) = {ft.slope_theory:.12g}")
    print(f"max |ln(P_n/P_-n) - slope*n| over |n| <= {args.nmax}: {ft.max_abs_deviation:.5f}")
    if sym.max_violation > 1e-10 or ft.max_abs_deviation > args.tol:
        print("FAIL: fluctuation-theorem check exceeded tolerance", file=sys.stderr)
        return 1
    print("fluctuation theorem verified")
    return 0


def _cmd_oracle(args) -> int:
    params = _scenario(args)
    orc = fullspace.oracle_current_and_cumulants(params)
    lad = engine.cumulants_resolvent(params)
    scale = max(abs(v) for v in lad.cumulants.values())
    worst = 0.0
    for k in (1, 2, 3, 4):
        rel = abs(orc[k] - lad[k]) / max(abs(lad[k]), 1e-9 * scale)
        worst = max(worst, rel)
        print(f"C{k}: full-space {orc[k]:.12g}  ladder {lad[k]:.12g}  rel {rel:.2e}")
    pops = fullspace.stationary_populations_fullspace(params)
    from .model import stationary_distribution

    dev = float(np.abs(pops - stationary_distribution(params)).max())
    print(f"stationary-distribution deviation: {dev:.2e}")
    if worst > args.tol or dev > 1e-10:
        print("FAIL: full-space oracle disagrees with the ladder reduction", file=sys.stderr)
        return 1
    print("oracle equivalence verified")
    return 0


def _cmd_selftest(args) -> int:
    failures = []

    def check(name, fn):
        try:
            fn()
        except FcsError as exc:
            failures.append((name, str(exc)))
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")

    scenarios = {
        "moderate bias": SystemParams.source_drain(4, 1.0, 2.0, 0.8, 0.3),
        "poisson regime": SystemParams.source_drain(4, 1.0, 1e-3, 1.0, 0.0),
        "large bias": SystemParams.source_drain(2, 1.0, 1e6, 1.0, 1.0),
        "zero bias": SystemParams.source_drain(4, 1.0, 400.0, 1.0, 400.0),
    }
    for name, params in scenarios.items():
        check(f"cross-validate {name}", lambda p=params: engine.cross_validate(p))

    def oracle_check(n_atoms):
        params = SystemParams.source_drain(n_atoms, 1.1, 0.9, 0.7, 0.3)
        orc = fullspace.oracle_current_and_cumulants(params)
        lad = engine.cumulants_resolvent(params)
        scale = max(abs(v) for v in lad.cumulants.values())
        for k in (1, 2, 3, 4):
            rel = abs(orc[k] - lad[k]) / max(abs(lad[k]), 1e-9 * scale)
            if rel > 1e-6:
                raise FcsError(f"oracle C{k} disagrees at N={n_atoms}: rel {rel:.2e}")

    for n_atoms in (1, 2, 3):
        check(f"oracle equivalence N={n_atoms}", lambda n=n_atoms: oracle_check(n))

    def symmetry():
        params = SystemParams.source_drain(6, 0.9, 1.4, 1.1, 0.5)
        rep = fluctuation.symmetry_check(params)
        if rep.max_violation > 1e-10:
            raise FcsError(f"characteristic-polynomial symmetry violated: {rep.max_violation:.2e}")

    check("counting-field symmetry", symmetry)
    if failures:
        print(f"{len(failures)} selftest failure(s)", file=sys.stderr)
        return 1
    print("all selftests passed")
    return 0


def _add_scenario_options(parser, n_list=False):
    parser.add_argument("--N", type=_int_list if n_list else _positive_int,
                        default=(1, 2, 4, 8) if n_list else 2,
                        help="atom count" + (" list (comma separated)" if n_list else ""))
    parser.add_argument("--nS", type=_nonneg, default=1.0, help="source occupation")
    parser.add_argument("--nD", type=_nonneg, default=0.0, help="drain occupation")
    parser.add_argument("--gammaS", type=_nonneg, default=1.0, help="source coupling rate")
    parser.add_argument("--gammaD", type=_nonneg, default=1.0, help="drain coupling rate")
    parser.add_argument("--omega", type=_positive, default=1.0, help="level splitting")
    parser.add_argument("--config", default=None, help="key=value config file; flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dickefcs",
        description="Counting statistics of photon transport through a collective N-atom medium",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_current = sub.add_parser("current", help="stationary photon current")
    _add_scenario_options(p_current)
    p_current.set_defaults(handler=_cmd_current)

    p_cum = sub.add_parser("cumulants", help="stationary current cumulants C1..C4")
    _add_scenario_options(p_cum)
    p_cum.add_argument("--method", choices=("res", "eig", "both"), default="res")
    p_cum.add_argument("--orders", default="1,2,3,4", help="comma-separated cumulant orders")
    p_cum.set_defaults(handler=_cmd_cumulants)

    p_sweep = sub.add_parser("sweep", help="parameter sweep with CSV output")
    _add_scenario_options(p_sweep, n_list=True)
    p_sweep.add_argument("--var", choices=SWEEP_VARIABLES, required=True)
    grid = p_sweep.add_mutually_exclusive_group(required=True)
    grid.add_argument("--log", nargs=2, type=float, metavar=("LO", "HI"))
    grid.add_argument("--lin", nargs=2, type=float, metavar=("LO", "HI"))
    p_sweep.add_argument("--points", type=_grid_points, required=True)
    p_sweep.add_argument("--outputs", default=",".join(DEFAULT_OUTPUTS))
    p_sweep.add_argument("--method", choices=("res", "eig"), default="res")
    p_sweep.add_argument("--jobs", type=_positive_int, default=1)
    p_sweep.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_tr = sub.add_parser("transient", help="single-bath transient emission")
    p_tr.add_argument("--kind", choices=("flash", "pn"), default="flash")
    p_tr.add_argument("--N", type=_positive_int, default=8)
    p_tr.add_argument("--nB", type=_nonneg, default=0.0, help="bath occupation")
    p_tr.add_argument("--gamma", type=_positive, default=1.0)
    p_tr.add_argument("--omega", type=_positive, default=1.0)
    p_tr.add_argument("--tmax", type=_positive, default=3.0)
    p_tr.add_argument("--points", type=_positive_int, default=301)
    p_tr.add_argument("--out", default=None)
    p_tr.add_argument("--config", default=None)
    p_tr.set_defaults(handler=_cmd_transient)

    p_eq = sub.add_parser("equilibrium", help="single-bath stationary moments and cumulants")
    p_eq.add_argument("--N", type=_positive_int, default=4)
    p_eq.add_argument("--betaOmega", type=float, default=0.0)
    p_eq.add_argument("--config", default=None)
    p_eq.set_defaults(handler=_cmd_equilibrium)

    p_ft = sub.add_parser("verify-ft", help="fluctuation-theorem and symmetry checks")
    p_ft.add_argument("--N", type=_positive_int, default=2)
    p_ft.add_argument("--betaS", type=_positive, default=0.5)
    p_ft.add_argument("--betaD", type=_positive, default=1.0)
    p_ft.add_argument("--omega", type=_positive, default=1.0)
    p_ft.add_argument("--gamma", type=_positive, default=1.0)
    p_ft.add_argument("--t", type=_positive, default=50.0)
    p_ft.add_argument("--nmax", type=_positive_int, default=5)
    p_ft.add_argument("--tol", type=_positive, default=0.02)
    p_ft.add_argument("--config", default=None)
    p_ft.set_defaults(handler=_cmd_verify_ft)

    p_orc = sub.add_parser("oracle", help="full product-space oracle vs ladder reduction")
    _add_scenario_options(p_orc)
    p_orc.add_argument("--tol", type=_positive, default=1e-6)
    p_orc.set_defaults(handler=_cmd_oracle)

    p_self = sub.add_parser("selftest", help="cross-validation and oracle battery")
    p_self.add_argument("--config", default=None)
    p_self.set_defaults(handler=_cmd_selftest)

    return parser


def _load_config(path: str) -> list[str]:
    flags = []
    try:
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise FcsError(f"bad config line (need key=value): {line!r}")
                key, value = (tok.strip() for tok in line.split("=", 1))
                flags.extend([f"--{key}", value])
    except OSError as exc:
        raise FcsError(f"cannot read config {path}: {exc}") from exc
    return flags


def _inject_config(argv: list[str]) -> list[str]:
    """Splice config-file options right after the subcommand so flags override."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv  # let argparse report the missing value
    flags = _load_config(argv[idx + 1])
    return argv[:1] + flags + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv and not argv[0].startswith("-"):
            argv = _inject_config(argv)
        args = parser.parse_args(argv)
        return args.handler(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))  # exits 2
    except FcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
