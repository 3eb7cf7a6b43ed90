"""Command-line harness tying the pipeline together: dataset
generation, training, evaluation, closed-loop balance and grasp runs,
the flow kernel benchmark, and the live steering service.

Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 a requested
check missed its budget.

Facts land on stdout in a fixed format (the determinism checks diff
them); progress chatter goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import balance, dataset, grasp, posenet, skinsim
from . import optflow
from .optflow.dis import FlowParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_CHECK = 3


class UsageError(Exception):
    pass


class CheckFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_config(args) -> dict:
    if not args.config:
        return {}
    p = Path(args.config)
    try:
        raw = json.loads(p.read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"{p}: config must be a JSON object")
    return raw


def _section(conf, name, cls, **extra):
    try:
        return cls(**{**conf.get(name, {}), **extra})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"config section {name!r}: {exc}") from None


def _opt_section(conf, name, cls):
    return _section(conf, name, cls) if name in conf else None


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stderr_progress(label):
    def cb(done, total):
        print(f"{label} {done}/{total}", file=sys.stderr)
    return cb


def _print_rmse(metrics):
    print(f"rmse_theta_f {metrics['rmse_theta_f']:.6f}")
    print(f"rmse_theta_g {metrics['rmse_theta_g']:.6f}")
    print(f"rmse {metrics['rmse']:.6f}")


# -- subcommands ----------------------------------------------------------


def cmd_gen_data(args):
    conf = _load_config(args)
    cfg = _section(conf, "gen", dataset.GenConfig)
    geom = _opt_section(conf, "geom", skinsim.LegGeometry)
    skin = _opt_section(conf, "skin", skinsim.SkinParams)
    fp = _opt_section(conf, "flow", FlowParams)
    ds = dataset.generate_dataset(cfg, args.seed, geom, skin, fp,
                                  progress=_stderr_progress("gen"))
    out = _out_dir(args)
    path = out / "dataset.tfds"
    dataset.save_dataset(path, ds)
    print(f"dataset {path}")
    print(f"samples {len(ds)}")


def cmd_train(args):
    conf = _load_config(args)
    ds = dataset.load_dataset(args.data)
    tcfg = _section(conf, "train", posenet.TrainConfig, seed=args.seed)
    got = tuple(int(v) for v in ds.fields.shape[1:3])
    if "net" in conf:
        spec = _section(conf, "net", posenet.NetworkSpec)
        if (spec.in_h, spec.in_w) != got:
            raise UsageError(
                f"network input {spec.in_h}x{spec.in_w} does not match "
                f"dataset fields {got[0]}x{got[1]}")
    else:
        spec = _section(conf, "net", posenet.NetworkSpec,
                        in_h=got[0], in_w=got[1])
    tr, te = dataset.split(ds, tcfg.split, args.seed)
    out = _out_dir(args)
    est, history = posenet.train(
        tr.fields, tr.targets(), spec, tcfg, te.fields, te.targets(),
        curve_path=out / "train_curve.csv",
        log=lambda line: print(line, file=sys.stderr))
    ckpt = out / "model.tfck"
    posenet.save_checkpoint(ckpt, est, training_meta={
        "seed": args.seed, "data": str(args.data), "epochs": tcfg.epochs,
        "samples_train": len(tr), "samples_test": len(te)})
    print(f"checkpoint {ckpt}")
    print(f"samples_train {len(tr)}")
    print(f"samples_test {len(te)}")
    metrics = posenet.evaluate(est, te.fields, te.targets())
    _print_rmse(metrics)


def cmd_eval(args):
    est, _meta = posenet.load_checkpoint(args.ckpt)
    ds = dataset.load_dataset(args.data)
    if args.test_split:
        _tr, part = dataset.split(ds, args.split_ratio, args.seed)
    else:
        part = ds
    print(f"samples {len(part)}")
    _print_rmse(posenet.evaluate(est, part.fields, part.targets()))


def cmd_run_balance(args):
    conf = _load_config(args)
    bcfg = _opt_section(conf, "balance", balance.BalanceConfig)
    gains = _opt_section(conf, "gains", balance.ControllerGains)
    geom = _opt_section(conf, "geom", skinsim.LegGeometry)
    skin = _opt_section(conf, "skin", skinsim.SkinParams)
    fp = _opt_section(conf, "flow", FlowParams)
    if args.ckpt:
        est, _ = posenet.load_checkpoint(args.ckpt)
    else:
        est = balance.ShearInverseEstimator(skin=skin, geom=geom)
    knots = skinsim.load_profile(args.profile) if args.profile \
        else balance.four_stage_profile()
    trace = balance.run_scenario(
        knots, args.mode, bcfg, gains=gains, geom=geom, skin=skin,
        estimator=est, flow_params=fp, seed=args.seed,
        duration=args.duration)
    out = _out_dir(args)
    path = out / "balance_trace.csv"
    trace.to_csv(path)
    print(f"trace {path}")
    print(f"rmse_phi {trace.rmse_tracking():.6f}")
    print(f"unstable {str(bool(trace.unstable)).lower()}")
    if trace.unstable:
        print(f"unstable_reason {trace.unstable_reason}")


def cmd_run_grasp(args):
    conf = _load_config(args)
    model = _opt_section(conf, "grasp_model", grasp.FrictionModel) \
        or grasp.FrictionModel()
    plant = _opt_section(conf, "grasp_plant", grasp.GraspPlant) \
        or grasp.GraspPlant()
    if args.schedule:
        sched = grasp.load_schedule(args.schedule)
    elif args.preset == "heavy":
        sched = grasp.staircase_schedule(0.30, n_steps=6)
    else:
        sched = grasp.staircase_schedule(0.05)
    trace = grasp.simulate_grasp(sched, args.controller == "on", model,
                                 plant, duration=args.duration)
    out = _out_dir(args)
    path = out / "grasp_trace.csv"
    trace.to_csv(path)
    mu = trace.meta["mu_nominal"]
    print(f"trace {path}")
    print(f"mu_nominal {mu:.6f}")
    print(f"crossover_s {trace.crossover_seconds(mu, plant.band_d):.3f}")
    print(f"intact {str(trace.grasp_intact).lower()}")


def _shifted(ref, d):
    qry = np.full_like(ref, 127)
    ys = slice(max(0, d[1]), ref.shape[0] + min(0, d[1]))
    xs = slice(max(0, d[0]), ref.shape[1] + min(0, d[0]))
    ys_s = slice(max(0, -d[1]), ref.shape[0] + min(0, -d[1]))
    xs_s = slice(max(0, -d[0]), ref.shape[1] + min(0, -d[0]))
    qry[ys, xs] = ref[ys_s, xs_s]
    return qry


_BENCH_GRID = ((3, 8), (5, 8), (5, 12))
_BENCH_DEFAULT = (5, 8)


def cmd_flow_bench(args):
    if args.backend == "both":
        backends = ["numpy"]
        try:
            optflow.get_backend("cython")
            backends.append("cython")
        except ImportError:
            print("cython backend not built; benchmarking numpy only",
                  file=sys.stderr)
    elif args.backend == "auto":
        backends = [optflow.get_backend(None)[1]]
    else:
        backends = [args.backend]

    rng = np.random.default_rng(args.seed)
    shifts = []
    while len(shifts) < args.trials:
        d = tuple(int(v) for v in rng.integers(-5, 6, size=2))
        if d != (0, 0):
            shifts.append(d)
    pattern = optflow.generate_pattern(40, 30, 8, 8, seed=args.seed)
    out = _out_dir(args)
    b = 12  # border crop: flow at the frame edge is unconstrained

    totals = {}
    failures = []
    for backend in backends:
        rows = []
        for lv, ps in _BENCH_GRID:
            params = FlowParams(pyramid_levels=lv, patch_size=ps,
                                patch_stride=max(1, ps // 2))
            errs = []
            ms = []
            for d in shifts:
                qry = _shifted(pattern, d)
                t0 = time.perf_counter()
                flow = optflow.dis_flow(pattern, qry, params,
                                       backend=backend)
                ms.append((time.perf_counter() - t0) * 1e3)
                err = np.hypot(flow[b:-b, b:-b, 0] - d[0],
                               flow[b:-b, b:-b, 1] - d[1])
                errs.append(err.ravel())
            pooled = np.concatenate(errs)
            rows.append((lv, ps, float(pooled.mean()),
                         float(np.percentile(pooled, 95)),
                         float(np.mean(ms))))
        path = out / f"flow_bench_{backend}.csv"
        with open(path, "w") as f:
            f.write("level,patch,epe_mean,epe_p95,millis\n")
            for lv, ps, em, ep, t in rows:
                f.write(f"{lv},{ps},{em:.4f},{ep:.4f},{t:.2f}\n")
        for lv, ps, em, ep, t in rows:
            if (lv, ps) == _BENCH_DEFAULT:
                totals[backend] = t
                print(f"{backend} level={lv} patch={ps} "
                      f"epe_mean={em:.4f} epe_p95={ep:.4f} millis={t:.2f}")
                if em > args.epe_budget:
                    failures.append(
                        f"{backend}: epe_mean {em:.4f} over budget "
                        f"{args.epe_budget}")
        print(f"bench {path}")
    if len(totals) == 2:
        print(f"speedup cython {totals['numpy'] / totals['cython']:.2f}x")
    if failures:
        raise CheckFailure("; ".join(failures))


def cmd_serve(args):
    from . import service

    conf = _load_config(args)
    cfg = _section(conf, "service", service.ServiceConfig, mode=args.mode,
                   seed=args.seed)
    kw = {}
    if args.ckpt:
        kw["estimator"], _ = posenet.load_checkpoint(args.ckpt)
    for name, cls in (("balance", balance.BalanceConfig),
                      ("gains", balance.ControllerGains),
                      ("geom", skinsim.LegGeometry),
                      ("skin", skinsim.SkinParams),
                      ("flow", FlowParams),
                      ("grasp_model", grasp.FrictionModel),
                      ("grasp_plant", grasp.GraspPlant)):
        obj = _opt_section(conf, name, cls)
        if obj is not None:
            key = "balance_cfg" if name == "balance" else \
                "flow_params" if name == "flow" else name
            kw[key] = obj
    port = args.port if args.port is not None \
        else int(os.environ.get("TACTILEFOOT_PORT", "8765"))
    print(f"serving on ws://{args.host}:{port}/ws", file=sys.stderr)
    service.serve(cfg, host=args.host, port=port, **kw)


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", metavar="JSON",
                        help="JSON file with parameter sections")
    common.add_argument("--out", default=".", metavar="DIR")

    p = _Parser(prog="tactilefoot",
                description="tactile-foot simulation harness")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("gen-data", parents=[common],
                        help="synthesize a flow/pose dataset")
    sp.set_defaults(func=cmd_gen_data)

    sp = sub.add_parser("train", parents=[common],
                        help="train the pose regressor")
    sp.add_argument("--data", required=True, metavar="TFDS")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", parents=[common],
                        help="evaluate a checkpoint on a dataset")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--data", required=True, metavar="TFDS")
    sp.add_argument("--test-split", action="store_true",
                    help="evaluate only the held-out side of the split")
    sp.add_argument("--split-ratio", type=float, default=0.8)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("run-balance", parents=[common],
                        help="closed-loop plate-balance scenario")
    sp.add_argument("--mode", choices=balance.MODES, default="tactile")
    sp.add_argument("--profile", metavar="JSON",
                    help="plate profile (default: the 4-stage sweep)")
    sp.add_argument("--ckpt", help="pose checkpoint (default: shear inverse)")
    sp.add_argument("--duration", type=float)
    sp.set_defaults(func=cmd_run_balance)

    sp = sub.add_parser("run-grasp", parents=[common],
                        help="two-finger grasp under a load schedule")
    sp.add_argument("--schedule", metavar="JSON")
    sp.add_argument("--preset", choices=("ramp", "heavy"), default="ramp")
    sp.add_argument("--controller", choices=("on", "off"), default="on")
    sp.add_argument("--duration", type=float, default=10.0)
    sp.set_defaults(func=cmd_run_grasp)

    sp = sub.add_parser("flow-bench", parents=[common],
                        help="benchmark the flow kernels")
    sp.add_argument("--backend",
                    choices=("auto", "numpy", "cython", "both"),
                    default="both")
    sp.add_argument("--trials", type=int, default=4)
    sp.add_argument("--epe-budget", type=float, default=0.25)
    sp.set_defaults(func=cmd_flow_bench)

    sp = sub.add_parser("serve", parents=[common],
                        help="run the live steering service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int)
    sp.add_argument("--mode", choices=balance.MODES, default="tactile")
    sp.add_argument("--ckpt")
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
