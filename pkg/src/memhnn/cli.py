"""memhnn command line.

    memhnn gen --n 60 --density 0.5 --seed 7
    memhnn solve rand-n60-d0.5-s7.txt --noise quad-super:5 --sweeps 1000
    memhnn sweep-noise G.txt --amplitudes 0:5:0.5 --seeds 1000 --sweeps 1000
    memhnn schedule-compare G.txt --schedules none,fixed:1.5,quad-super:5,none+theta-ramp:2
    memhnn xbar-calibrate --params standard --sizes 8..128
    memhnn tts G.txt --sweeps 50 --batch 10

Any long option may also come from ``--config FILE`` (``key = value`` lines).
Output goes to ``--out-dir``, defaulting to $MEMHNN_OUTPUT_DIR or ``.``.
Exit status: 0 ok, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import bench
from .bench import ConfigError, EnergyTable, ScheduleSpec
from .crossbar import (CrossbarConfig, NumericalError, RtnConfig, UnsupportedWeightsError,
                       calibrate, make_backend, write_calibration)
from .hnn import UpdatePlan, derive_seed, run_anneal, write_trace_csv
from .instances import (InstanceParseError, generate_dense_random, graph_to_weights, read_instance,
                        write_instance)
from .oracle import reference_optimum
from .schedules import parse_noise, parse_threshold

ENV_OUTPUT = "MEMHNN_OUTPUT_DIR"


class UsageError(Exception):
    pass


# -- spec parsing ------------------------------------------------------------------


def parse_float_list(text: str) -> list[float]:
    """``0,0.5,1`` or ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError
            k = int(round((stop - start) / step))
            return [round(start + i * step, 12) for i in range(k + 1)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot read number list {text!r}")


def parse_sizes(text: str) -> list[int]:
    """``8,16,32`` or ``8..128`` (powers of two)."""
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split(".."))
            if lo < 1 or hi < lo:
                raise ValueError
            out = []
            while lo <= hi:
                out.append(lo)
                lo *= 2
            return out
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot read size list {text!r}")


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot read integer list {text!r}")


def parse_schedule(spec: str) -> ScheduleSpec:
    """``NOISE[+THRESHOLD]``; a threshold ramp switches to the hysteresis rule."""
    noise_s, _, thr_s = spec.partition("+")
    try:
        noise = parse_noise(noise_s)
        thr = parse_threshold(thr_s) if thr_s else parse_threshold("zero")
    except ValueError as e:
        raise ConfigError(str(e))
    rule = "hysteresis" if thr.kind != "zero" else "literal"
    return ScheduleSpec(spec, noise, thr, rule)


def parse_xbar(spec: str, prog_sigma=None) -> CrossbarConfig:
    """``standard``, ``sub-standard`` or ``r_on=..,r_off=..,r_wire=..``, optionally
    followed by ``,key=value`` overrides."""
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    base = {}
    if parts and "=" not in parts[0]:
        name = parts.pop(0)
        try:
            base = dict(CrossbarConfig.preset(name).__dict__)
        except ValueError as e:
            raise ConfigError(str(e))
    for p in parts:
        key, sep, value = p.partition("=")
        if not sep:
            raise ConfigError(f"bad crossbar parameter {p!r}")
        if key in ("mapping", "mode"):
            base[key] = value
            continue
        try:
            base[key] = float(value)
        except ValueError:
            raise ConfigError(f"crossbar parameter {key} needs a number")
    if prog_sigma is not None:
        base["prog_sigma"] = prog_sigma
    try:
        return CrossbarConfig(**base)
    except TypeError as e:
        raise ConfigError(f"unknown crossbar parameter: {e}")
    except ValueError as e:
        raise ConfigError(str(e))


def parse_backend(spec: str, prog_sigma=None):
    """``ideal`` | ``behavioral:SIGMA`` | ``nodal[:PARAMS]``; returns a config or None."""
    kind, _, rest = spec.partition(":")
    if kind == "ideal" and not rest:
        return None
    if kind == "behavioral":
        try:
            sigma = float(rest)
        except ValueError:
            raise ConfigError("behavioral backend reads 'behavioral:SIGMA'")
        return CrossbarConfig(mode="behavioral", sigma=sigma)
    if kind == "nodal":
        return parse_xbar(rest or "standard", prog_sigma).with_(mode="nodal")
    raise ConfigError(f"unknown backend {spec!r}")


# -- shared pieces ------------------------------------------------------------------


def _out_dir(args) -> str:
    d = args.out_dir or os.environ.get(ENV_OUTPUT) or "."
    os.makedirs(d, exist_ok=True)
    return d


def _plan(args) -> UpdatePlan:
    try:
        return UpdatePlan(args.batch, args.order)
    except ValueError as e:
        raise ConfigError(str(e))


def _backend(args, W, index=0):
    cfg = parse_backend(args.backend, args.prog_sigma)
    if cfg is None:
        return None
    rtn = RtnConfig.default(cfg) if getattr(args, "rtn", False) else None
    try:
        return make_backend(W, cfg, seed=derive_seed(args.master_seed, 2**31, index), rtn=rtn)
    except UnsupportedWeightsError as e:
        raise ConfigError(str(e))


def _optimum(g, args) -> tuple[int, str]:
    if g.optimum is None and g.n > 26 and args.optimum_budget <= 0:
        raise ConfigError(f"{g.name}: no optimum metadata and --optimum-budget is 0")
    return reference_optimum(g, budget=args.optimum_budget, seed=args.master_seed)


def _add_run_flags(p, sweeps=1000, batch=1):
    p.add_argument("--sweeps", type=int, default=sweeps)
    p.add_argument("--seeds", type=int, default=100, help="runs per instance or per grid cell")
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--batch", type=int, default=batch, help="nodes updated per clock step")
    p.add_argument("--order", choices=("random", "fixed"), default="random")
    p.add_argument("--backend", default="ideal", help="ideal | behavioral:SIGMA | nodal[:PARAMS]")
    p.add_argument("--prog-sigma", type=float, default=None)
    p.add_argument("--rtn", action="store_true", help="enable the RTN injection row (nodal)")
    p.add_argument("--jobs", type=int, default=1)


def _add_common(p):
    p.add_argument("--out-dir", default=None)
    p.add_argument("--config", default=None, help="key = value file supplying long options")


# -- commands ---------------------------------------------------------------------


def cmd_gen(args) -> int:
    out = _out_dir(args)
    for k in range(args.count):
        seed = args.seed + k
        g = generate_dense_random(args.n, args.density, args.weighted, seed)
        if args.with_optimum:
            g = g.with_optimum(*reference_optimum(g, budget=args.optimum_budget, seed=seed))
        path = os.path.join(out, g.name + ".txt")
        write_instance(g, path)
        print(path)
    return 0


def cmd_solve(args) -> int:
    out = _out_dir(args)
    plan = _plan(args)
    try:
        noise, thr = parse_noise(args.noise), parse_threshold(args.threshold)
    except ValueError as e:
        raise ConfigError(str(e))
    rule = args.rule or ("hysteresis" if thr.kind != "zero" else "literal")
    graphs = [read_instance(p) for p in args.instances]
    summary = dict(noise=noise.spec(), threshold=thr.spec(), rule=rule, sweeps=args.sweeps,
                   batch=plan.batch_size, order=plan.order, backend=args.backend,
                   master_seed=args.master_seed, instances=[])
    for i, g in enumerate(graphs):
        W = graph_to_weights(g)
        backend = _backend(args, W, i)
        runs = []
        for k in range(args.seeds):
            seed = derive_seed(args.master_seed, i, k)
            tr = run_anneal(W, plan, noise, thr, args.sweeps, seed, backend, rule)
            runs.append(dict(run=k, **tr.summary()))
            if args.traces:
                os.makedirs(os.path.join(out, "traces"), exist_ok=True)
                write_trace_csv(tr, os.path.join(out, "traces", f"{g.name}-{k:04d}.csv"))
        entry = dict(instance=g.name, n=g.n, m=g.m, runs=runs,
                     best_cut=max(r["best_cut"] for r in runs) if runs else None)
        if g.optimum is not None:
            entry["optimum"] = g.optimum.value
            entry["optimum_provenance"] = g.optimum.provenance
            entry["p_success"] = bench.success_probability(
                [r["best_cut"] >= g.optimum.value for r in runs]) if runs else None
        summary["instances"].append(entry)
    path = os.path.join(out, "summary.json")
    bench.write_json(summary, path)
    print(path)
    return 0


NOISE_SWEEP_COLUMNS = ["amplitude", "mean_cut", "min_cut", "max_cut", "p_success"]
SCHEDULE_COLUMNS = ["schedule", "sweeps", "mean_cut", "ci_low", "ci_high", "p_success"]
CALIBRATION_COLUMNS = ["size", "density", "trials", "sigma"]
TTS_COLUMNS = ["instance", "runs", "p_success", "p_low", "p_high", "t_ann", "n_rep", "tts",
               "power", "energy_to_solution", "solutions_per_second_per_watt"]


def cmd_sweep_noise(args) -> int:
    g = read_instance(args.instance)
    opt, _ = _optimum(g, args)
    W = graph_to_weights(g)
    samples = bench.noise_sweep(g, parse_float_list(args.amplitudes), args.seeds, args.sweeps, opt,
                                args.master_seed, _plan(args), args.criterion, _backend(args, W),
                                args.jobs)
    path = os.path.join(_out_dir(args), "noise_sweep.csv")
    bench.write_csv(bench.noise_sweep_rows(samples), NOISE_SWEEP_COLUMNS, path)
    print(path)
    return 0


def cmd_schedule_compare(args) -> int:
    g = read_instance(args.instance)
    opt, _ = _optimum(g, args)
    W = graph_to_weights(g)
    specs = [parse_schedule(s) for s in args.schedules.split(",") if s.strip()]
    budgets = parse_int_list(args.budgets)
    samples = bench.schedule_compare(g, specs, budgets, args.seeds, opt, args.master_seed,
                                     _plan(args), args.criterion, _backend(args, W), args.jobs)
    rows = bench.schedule_rows(samples, args.resamples, seed=args.master_seed)
    path = os.path.join(_out_dir(args), "schedule_compare.csv")
    bench.write_csv(rows, SCHEDULE_COLUMNS, path)
    print(path)
    return 0


def cmd_xbar_calibrate(args) -> int:
    cfg = parse_xbar(args.params, args.prog_sigma).with_(mode="nodal")
    sizes = parse_sizes(args.sizes)
    if max(sizes) > args.max_size:
        raise ConfigError(f"size {max(sizes)} exceeds --max-size {args.max_size}")
    rows = calibrate(cfg, sizes, parse_float_list(args.densities), args.trials, args.master_seed)
    path = os.path.join(_out_dir(args), "calibration.csv")
    write_calibration(rows, path)
    print(path)
    return 0


def cmd_tts(args) -> int:
    table = EnergyTable.load(args.profile) if args.profile else EnergyTable.default()
    try:
        pw = bench.power(table, args.mode, args.clock, args.overhead, args.include_leakage)
    except ValueError as e:
        raise ConfigError(str(e))
    out = _out_dir(args)
    clock_period = 1.0 / args.clock
    if args.p is not None:
        if not args.n:
            raise ConfigError("--p needs --n for the annealing time")
        t_ann = bench.annealing_time(args.n, args.sweeps, args.batch, clock_period)
        rep = bench.TtsReport.build(args.p, (args.p, args.p), t_ann, pw, args.target)
        report = dict(instances=[rep.to_dict()], median_tts=bench._jsonable(rep.tts),
                      median_tts_interval=[bench._jsonable(rep.tts)] * 2)
        rows = [rep]
    else:
        if not args.instances:
            raise ConfigError("tts needs instance files or --p")
        graphs = []
        for path in args.instances:
            g = read_instance(path)
            if g.optimum is None:
                g = g.with_optimum(*_optimum(g, args))
            graphs.append(g)
        try:
            noise, thr = parse_noise(args.noise), parse_threshold(args.threshold)
        except ValueError as e:
            raise ConfigError(str(e))
        rule = "hysteresis" if thr.kind != "zero" else "literal"
        factory = (lambda W, i: _backend(args, W, i)) if args.backend != "ideal" else None
        camp = bench.tts_campaign(graphs, args.seeds, args.master_seed, plan=_plan(args), noise=noise,
                                  threshold=thr, sweeps=args.sweeps, rule=rule, backend_factory=factory,
                                  clock_period=clock_period, power_w=pw, target=args.target,
                                  criterion=args.criterion, resamples=args.resamples, jobs=args.jobs)
        report, rows = camp.to_dict(), camp.instances
    report.update(mode=args.mode, clock_hz=args.clock, overhead=args.overhead)
    bench.write_json(report, os.path.join(out, "tts.json"))
    csv_rows = []
    for r in rows:
        d = r.to_dict()
        d["p_low"], d["p_high"] = d.pop("p_interval")
        csv_rows.append({k: ("inf" if d[k] is None else d[k]) for k in TTS_COLUMNS})
    bench.write_csv(csv_rows, TTS_COLUMNS, os.path.join(out, "tts.csv"))
    print(os.path.join(out, "tts.json"))
    return 0


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="memhnn", description="Noisy Hopfield annealing for Max-Cut.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write random dense instances")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--with-optimum", action="store_true", help="attach a reference optimum")
    p.add_argument("--optimum-budget", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="anneal instances and write a summary")
    p.add_argument("instances", nargs="+")
    p.add_argument("--noise", default="none")
    p.add_argument("--threshold", default="zero")
    p.add_argument("--rule", choices=("literal", "hysteresis"), default=None)
    p.add_argument("--traces", action="store_true", help="write per-run sweep CSVs")
    _add_run_flags(p)
    p.set_defaults(seeds=10)
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    for name, func, helptext in (("sweep-noise", cmd_sweep_noise, "fixed-noise amplitude sweep"),
                                 ("schedule-compare", cmd_schedule_compare, "compare noise schedules")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("instance")
        _add_run_flags(p)
        p.add_argument("--criterion", choices=bench.SUCCESS_CRITERIA, default="best",
                       help="success by best-encountered or final cut")
        p.add_argument("--optimum-budget", type=int, default=1000, help="SA restarts if no optimum is known")
        if name == "sweep-noise":
            p.add_argument("--amplitudes", default="0:5:0.5")
        else:
            p.add_argument("--schedules", default="none,fixed:1.5,quad-super:5,none+theta-ramp:2")
            p.add_argument("--budgets", default="100,300,1000")
            p.add_argument("--resamples", type=int, default=2000)
        _add_common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("xbar-calibrate", help="analog error sigma versus array size")
    p.add_argument("--params", default="standard")
    p.add_argument("--sizes", default="8..128")
    p.add_argument("--densities", default="1.0,0.5")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--prog-sigma", type=float, default=None)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--max-size", type=int, default=256)
    _add_common(p)
    p.set_defaults(func=cmd_xbar_calibrate)

    p = sub.add_parser("tts", help="time- and energy-to-solution report")
    p.add_argument("instances", nargs="*")
    _add_run_flags(p, sweeps=50, batch=10)
    p.add_argument("--noise", default="quad-super:5")
    p.add_argument("--threshold", default="zero")
    p.add_argument("--criterion", choices=bench.SUCCESS_CRITERIA, default="best")
    p.add_argument("--optimum-budget", type=int, default=1000)
    p.add_argument("--clock", type=float, default=1e9, help="clock frequency in Hz")
    p.add_argument("--mode", choices=bench.MODES, default="1col")
    p.add_argument("--overhead", type=float, default=2.0)
    p.add_argument("--include-leakage", action="store_true")
    p.add_argument("--profile", default=None, help="energy profile file")
    p.add_argument("--target", type=float, default=0.99)
    p.add_argument("--resamples", type=int, default=2000)
    p.add_argument("--p", type=float, default=None, help="skip simulation; use this success probability")
    p.add_argument("--n", type=int, default=None, help="node count when using --p")
    _add_common(p)
    p.set_defaults(func=cmd_tts)
    return ap


def _config_argv(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Splice options from ``--config FILE`` in front of the explicit ones."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file")
    path = argv[i + 1]
    if not argv or argv[0] not in _subparsers(parser):
        raise UsageError("--config must follow a command name")
    sub = _subparsers(parser)[argv[0]]
    flags = {opt: a for a in sub._actions for opt in a.option_strings}
    extra = []
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config file: {e}")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        opt = "--" + key.strip().replace("_", "-")
        if not sep or opt not in flags or opt == "--config":
            raise UsageError(f"{path}: line {lineno}: unknown option {key.strip()!r}")
        value = value.strip()
        if flags[opt].nargs == 0:
            if value.lower() in ("1", "true", "yes", "on"):
                extra.append(opt)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"{path}: line {lineno}: {opt} takes true or false")
        else:
            extra += [opt, value]
    rest = argv[1:i] + argv[i + 2:]
    return [argv[0]] + extra + rest


def _subparsers(parser) -> dict:
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices
    return {}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _config_argv(argv, parser)
    except UsageError as e:
        print(f"memhnn: error: {e}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ConfigError, InstanceParseError, UsageError) as e:
        print(f"memhnn: error: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError) as e:
        print(f"memhnn: error: {e}", file=sys.stderr)
        return 2
    except (NumericalError, RuntimeError, ValueError, OSError) as e:
        print(f"memhnn: runtime failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
