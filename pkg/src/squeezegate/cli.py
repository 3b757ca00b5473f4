"""Command-line front end.

Every subcommand writes CSV or JSON to ``--out``; without ``--out`` it writes
``<subcommand>.<format>`` inside ``$SQUEEZEGATE_OUT_DIR`` when that is set,
else to standard output.  Failures exit nonzero with a JSON object carrying a
stable ``code`` on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import analysis, calibration, fock, resources, spin, waveform
from .errors import SqueezeGateError
from .model import dumps_sequence, load_chain, load_sequence, preset_chain
from .sequences import FAMILIES, build

OUT_DIR_ENV = "SQUEEZEGATE_OUT_DIR"


class UsageError(SqueezeGateError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    if isinstance(obj, complex):
        return [float(fmt(obj.real)), float(fmt(obj.imag))]
    return obj


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def to_json(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _emit(args, text: str, ext: str | None = None) -> Path | None:
    ext = ext or args.format
    if args.out:
        path = Path(args.out)
    elif os.environ.get(OUT_DIR_ENV):
        path = Path(os.environ[OUT_DIR_ENV]) / f"{args.command}.{ext}"
    else:
        sys.stdout.write(text)
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _info(args, message: str) -> None:
    # Status lines go to stdout only when the data went to a file.
    stream = sys.stdout if (args.out or os.environ.get(OUT_DIR_ENV)) else sys.stderr
    print(message, file=stream)


def _table(args, header, rows, meta: dict) -> None:
    if args.format == "csv":
        _emit(args, to_csv(header, rows))
    else:
        _emit(args, to_json({"metadata": meta, "columns": list(header), "rows": [list(r) for r in rows]}))


# --- shared argument groups -------------------------------------------------


def _add_output(p, formats=("csv", "json")):
    p.add_argument("--out", help="output path (default: $%s/<command>.<format> or stdout)" % OUT_DIR_ENV)
    p.add_argument("--format", choices=formats, default=formats[0])


def _add_source(p, default_family="xxx"):
    p.add_argument("--sequence", help="sequence JSON file (overrides --family)")
    p.add_argument("--family", choices=FAMILIES, default=default_family)
    p.add_argument("--phi0", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=0.0)
    p.add_argument("--zeta", type=float, default=0.0)
    p.add_argument("--phi3", type=float, default=math.pi / 4)
    p.add_argument("--no-echo", action="store_true")
    p.add_argument("--chain", help="chain JSON file")


def _add_sampling(p):
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)


def _sequence(args):
    if args.sequence:
        return load_sequence(args.sequence)
    chain = load_chain(args.chain) if args.chain else None
    return build(args.family, phi0=args.phi0, xi=args.xi, zeta=args.zeta, phi3=args.phi3,
                 echo=not args.no_echo, chain=chain)


def _prep(text: str | None, n: int):
    if text is None:
        return None
    if text in ("down", "up"):
        return [("z", text)] * n
    prep = spin.parse_prep(text)
    if len(prep) != n:
        raise UsageError(f"prep {text!r} has {len(prep)} entries for {n} ions")
    return prep


# --- subcommands ------------------------------------------------------------


def cmd_build(args) -> None:
    seq = _sequence(args)
    _emit(args, dumps_sequence(seq), "json")
    _info(args, f"{seq.label}: {len(seq.ops)} ops, total time {fmt(seq.total_time())} s")


def cmd_simulate(args) -> None:
    seq = _sequence(args)
    prep = _prep(args.prep, seq.n_ions)
    engines = ("branch", "fock") if args.engine == "both" else (args.engine,)
    cfg = fock.FockConfig(n_max=args.n_max)
    rhos = {e: analysis.evolve(seq, prep, e, cfg) for e in engines}
    probs = {e: spin.probabilities(r) for e, r in rhos.items()}
    n = seq.n_ions
    labels = [spin.outcome_label(i, n) for i in range(2**n)]
    rows = [[f"P({lab})"] + [float(probs[e][i]) for e in engines] for i, lab in enumerate(labels)]
    mags = {e: analysis.magnetizations(p) for e, p in probs.items()}
    rows += [[f"m{k + 1}"] + [mags[e][k] for e in engines] for k in range(n)]
    meta: dict[str, Any] = {"sequence": seq.label, "prep": args.prep or "from-sequence", "engines": list(engines)}
    if len(engines) == 2:
        td = fock.trace_distance(rhos["branch"], rhos["fock"])
        meta["trace_distance"] = td
        rows.append(["trace_distance"] + [td, td])
    if args.format == "csv":
        _emit(args, to_csv(["quantity"] + list(engines), rows))
    else:
        _emit(args, to_json({
            "metadata": meta,
            "results": {e: {"populations": dict(zip(labels, probs[e])), "magnetizations": mags[e]}
                        for e in engines},
        }))


def cmd_truth_table(args) -> None:
    seq = _sequence(args)
    table = analysis.truth_table(seq, args.engine)
    n = seq.n_ions
    labels = [spin.outcome_label(i, n) for i in range(2**n)]
    rows = [[labels[i]] + [float(x) for x in table[i]] for i in range(2**n)]
    _table(args, ["input"] + labels, rows, {"sequence": seq.label})


def cmd_parity(args) -> None:
    seq = _sequence(args)
    if args.prep is None:
        args.prep = args.input
    prep = _prep(args.prep, seq.n_ions)
    thetas = 2 * math.pi * np.arange(args.thetas) / args.thetas
    scan = analysis.parity_scan(seq, prep, thetas, args.engine, args.shots or None, args.seed)
    fit = analysis.fit_sine(scan, seq.n_ions)
    fid = analysis.ghz_fidelity(scan.populations, fit)
    sampled = scan.parities if args.shots else [float("nan")] * len(thetas)
    sig = scan.sigmas if args.shots else [float("nan")] * len(thetas)
    rows = [[float(t), float(e), float(s), float(g)] for t, e, s, g in zip(thetas, scan.exact, sampled, sig)]
    meta = {"sequence": seq.label, "prep": spin.format_prep(prep), "fit_amplitude": fit.amplitude,
            "fit_phase": fit.phase, "fit_offset": fit.offset, "fit_rms": fit.rms_residual,
            "ghz_fidelity": fid, "shots": args.shots, "seed": args.seed, "rng": analysis.RNG_ALGORITHM}
    _table(args, ["theta", "exact_value", "sampled_value", "sigma"], rows, meta)
    _info(args, f"fitted amplitude {fit.amplitude:.6f}, GHZ fidelity {fid:.6f}")


def cmd_scan(args) -> None:
    n = 4 if args.family == "rect4" else 3
    prep = _prep(args.prep, n) or ([("z", "down")] * n)
    grid = np.linspace(0.0, args.phi0_max, args.points)
    table = analysis.scan_phi0(args.family, grid, prep, args.xi, args.zeta, args.observable, args.engine,
                               args.shots or None, args.seed)
    names = list(table.columns)
    if names == ["flip"]:
        header = ["phi0", "exact_value", "sampled_value", "sigma"]
    else:
        header = ["phi0"] + [f"{c}_{k}" for c in names for k in ("exact", "sampled", "sigma")]
    nan = np.full(grid.size, np.nan)
    rows = []
    for i, x in enumerate(grid):
        row = [float(x)]
        for c in names:
            row += [float(table.columns[c][i]), float(table.sampled.get(c, nan)[i]),
                    float(table.sigmas.get(c, nan)[i])]
        rows.append(row)
    meta = dict(table.metadata, seed=args.seed, shots=args.shots, rng=analysis.RNG_ALGORITHM)
    _table(args, header, rows, meta)


def cmd_calibrate(args) -> None:
    cfg = fock.FockConfig(n_max=args.n_max)
    if args.experiment == "common-phase":
        grid = np.linspace(-math.pi, math.pi, args.points, endpoint=False)
        res = calibration.scan_common_phase(args.kind, args.amplitude, grid, args.drive_phase, cfg)
        rows = [[float(t), float(p)] for t, p in zip(res.thetas, res.flip)]
        meta = {"kind": args.kind, "amplitude": args.amplitude, "theta0": res.theta0,
                "inferred_spin_phase": res.spin_phase, "degenerate": res.degenerate}
        _table(args, ["theta", "flip_probability"], rows, meta)
    elif args.experiment == "orientation":
        grid = np.linspace(0, 2 * math.pi, args.points, endpoint=False)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = calibration.scan_squeeze_orientation(args.phi0, args.xi, grid, cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        rows = [[float(t), float(p)] for t, p in zip(res.motional_phases, res.flip)]
        meta = {"phi0": args.phi0, "xi": args.xi, "p_a": res.p_a, "p_b": res.p_b,
                "extraction_enabled": res.extraction_enabled}
        if res.extraction_enabled and res.p_a > 0:
            meta["estimate"] = list(calibration.estimate_phi_xi(res.p_a, res.p_b))
        _table(args, ["motional_phase", "flip_probability"], rows, meta)
    else:
        grid = np.linspace(-args.max_detuning, args.max_detuning, args.points)
        res = calibration.scan_motional_frequency(args.amplitude, grid, args.kind, None, cfg)
        closed = res.closed_form if res.closed_form is not None else np.full(grid.size, np.nan)
        rows = [[float(d), float(p), float(c)] for d, p, c in zip(res.detunings, res.flip, closed)]
        meta = {"variant": args.kind, "amplitude": args.amplitude, "minimum_detuning": res.minimum_detuning,
                "note": "squeeze variant is a stand-in composite" if args.kind == "squeeze" else ""}
        _table(args, ["detuning", "flip_probability", "closed_form"], rows, meta)


def cmd_waveform(args) -> None:
    chain = load_chain(args.chain) if args.chain else preset_chain(args.preset)
    sol = waveform.solve_waveform(chain, args.ion, complex(args.alpha, args.alpha_imag), args.duration, args.terms)
    report = waveform.verify_solution(sol, chain)
    out = sol.to_dict()
    out["modes"] = [{"mode": r.mode, "alpha": r.alpha, "ok": r.ok} for r in report]
    _emit(args, to_json(out), "json")
    if args.samples_out:
        t = np.linspace(0.0, sol.duration, args.samples)
        Path(args.samples_out).write_text(
            to_csv(["t", "rabi"], [[float(a), float(b)] for a, b in zip(t, sol.envelope(t))]))


def cmd_compare_cost(args) -> None:
    rows = [[r.n_ions, r.native_ops, r.two_qubit_gates, float(r.ratio)]
            for r in resources.compare(range(2, args.max_n + 1))]
    _table(args, ["n_ions", "native_ops", "two_qubit_gates", "ratio"], rows, {"max_n": args.max_n})


def cmd_recipe(args) -> int:
    """Run each entry of a recipe file, writing ``<name>.<format>`` into the output directory."""
    recipe = json.loads(Path(args.file).read_text())
    runs = recipe.get("runs")
    if not isinstance(runs, list) or not runs:
        raise UsageError(f"recipe {args.file} has no 'runs' list")
    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or ".")
    for run in runs:
        argv = [str(a) for a in run["argv"]]
        if "--out" in argv:
            raise UsageError("recipe runs must not set --out")
        fmt_ = argv[argv.index("--format") + 1] if "--format" in argv else (
            "json" if argv[0] in ("build", "waveform") else "csv")
        path = out_dir / f"{run['name']}.{fmt_}"
        rc = main(argv + ["--out", str(path)])
        if rc:
            return rc
        print(f"wrote {path}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="squeezegate", description="Trapped-ion N-body phase-gate simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="write a sequence file")
    b.add_argument("family_pos", nargs="?", choices=FAMILIES, help="gate family (same as --family)")
    _add_source(b)
    b.add_argument("--out")
    b.set_defaults(func=cmd_build, format="json")

    s = sub.add_parser("simulate", help="populations and magnetizations")
    _add_source(s)
    s.add_argument("--prep", help="per-ion prep like dz,ux,dz, or 'down'/'up'")
    s.add_argument("--engine", choices=("auto", "branch", "fock", "both"), default="auto")
    s.add_argument("--n-max", type=int, default=30)
    _add_output(s)
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("truth-table", help="z-basis truth table")
    _add_source(t)
    t.add_argument("--engine", choices=analysis.ENGINES, default="auto")
    _add_output(t)
    t.set_defaults(func=cmd_truth_table)

    q = sub.add_parser("parity", help="GHZ parity fringe and fidelity")
    _add_source(q)
    q.add_argument("--input", choices=("down", "up"), default="down")
    q.add_argument("--prep")
    q.add_argument("--thetas", type=int, default=24, help="number of analysis phases over [0, 2pi)")
    q.add_argument("--engine", choices=analysis.ENGINES, default="auto")
    _add_sampling(q)
    _add_output(q)
    q.set_defaults(func=cmd_parity)

    c = sub.add_parser("scan", help="flip probability or magnetization versus phi0")
    c.add_argument("--family", choices=FAMILIES[:3], default="ms")
    c.add_argument("--xi", type=float, default=0.0)
    c.add_argument("--zeta", type=float, default=0.0)
    c.add_argument("--phi0-max", type=float, default=math.pi)
    c.add_argument("--points", type=int, default=50)
    c.add_argument("--prep")
    c.add_argument("--observable", choices=("flip", "magnetization"), default="flip")
    c.add_argument("--engine", choices=analysis.ENGINES, default="auto")
    _add_sampling(c)
    _add_output(c)
    c.set_defaults(func=cmd_scan)

    k = sub.add_parser("calibrate", help="simulated calibration scans")
    k.add_argument("experiment", choices=("common-phase", "orientation", "motional"))
    k.add_argument("--kind", choices=("displace", "squeeze"), default="displace")
    k.add_argument("--amplitude", type=float, default=0.5)
    k.add_argument("--drive-phase", type=float, default=0.0)
    k.add_argument("--phi0", type=float, default=0.4)
    k.add_argument("--xi", type=float, default=0.27)
    k.add_argument("--max-detuning", type=float, default=2 * math.pi * 100e3)
    k.add_argument("--points", type=int, default=41)
    k.add_argument("--n-max", type=int, default=30)
    _add_output(k)
    k.set_defaults(func=cmd_calibrate)

    w = sub.add_parser("waveform", help="sine-basis amplitude shaping")
    w.add_argument("--chain")
    w.add_argument("--preset", type=int, choices=(3, 4), default=3)
    w.add_argument("--ion", type=int, default=0)
    w.add_argument("--alpha", type=float, default=0.5)
    w.add_argument("--alpha-imag", type=float, default=0.0)
    w.add_argument("--duration", type=float, default=26e-6)
    w.add_argument("--terms", type=int, default=12)
    w.add_argument("--samples", type=int, default=1001)
    w.add_argument("--samples-out", help="optional CSV of the sampled envelope")
    w.add_argument("--out")
    w.set_defaults(func=cmd_waveform, format="json")

    r = sub.add_parser("compare-cost", help="native versus two-qubit gate counts")
    r.add_argument("--max-n", type=int, default=6)
    _add_output(r)
    r.set_defaults(func=cmd_compare_cost)

    x = sub.add_parser("recipe", help="run a figure recipe file")
    x.add_argument("file")
    x.add_argument("--out-dir", help="directory for the recipe outputs (default: $%s or .)" % OUT_DIR_ENV)
    x.set_defaults(func=cmd_recipe)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = make_parser().parse_args(argv)
        if getattr(args, "family_pos", None):
            args.family = args.family_pos
        rc = args.func(args)
        return int(rc or 0)
    except SqueezeGateError as exc:
        print(json.dumps({"code": exc.code, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"code": "io_error", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
