"""Command-line entry point: ``ripforge {gen,certify,reduce,experiment}``.

Exit codes: 0 success (or passing verdict), 1 runtime error or failing
verdict, 2 usage error. Every randomised command requires ``--seed`` and
writes into ``<root>/<name>-<seed>/`` where root is ``--out-dir``, else
``$RIPFORGE_OUT``, else ``./runs``; an existing run directory is only
overwritten with ``--force``.
"""

from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
from pathlib import Path

import numpy as np

from ripforge import harness, io
from ripforge.certifiers import CERTIFIERS, RegimeError, get_certifier
from ripforge.distributions import DISTRIBUTIONS, get_distribution, matrix_sample
from ripforge.graphs import DenseSeed, er_generate, plant
from ripforge.reduction import ReductionConfig, reduce, witness_quadratic_form
from ripforge.ripcore import RipParams
from ripforge.rng import MASK64, derive_seed

REDUCTION_KEYS = ("m", "kappa", "L", "beta", "p_rule", "distribution")


class RunError(RuntimeError):
    pass


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value <= MASK64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _param(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _run_dir(args, name: str) -> Path:
    root = Path(args.out_dir or os.environ.get("RIPFORGE_OUT") or "runs")
    path = root / f"{name}-{args.seed}"
    if path.exists() and any(path.iterdir()) and not args.force:
        raise RunError(f"{path} already exists; pass --force to overwrite")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo_config(path: Path, command: str, seed, params: dict) -> None:
    io.write_json(path / "config.json", {"command": command, "master_seed": seed, "output_dir": str(path), "params": params})


def _load_config(path) -> dict:
    if path is None:
        return {}
    obj = io.read_json(path)
    if not isinstance(obj, dict):
        raise RunError(f"{path}: config must be a JSON object")
    return obj


# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.what == "matrix":
        params = {"distribution": args.dist, "n": args.n, "p": args.p}
        out = _run_dir(args, "gen-matrix")
        X = matrix_sample(get_distribution(args.dist), args.n, args.p, derive_seed(args.seed, "gen-matrix"))
        target = out / ("matrix.csv" if args.csv else "matrix.ripm")
        (io.write_matrix_csv if args.csv else io.write_matrix)(target, X)
        io.write_json(out / "matrix.json", dict(params, seed=args.seed))
    else:
        params = {"m": args.m, "plant": args.plant, "kappa": args.kappa, "epsilon": args.epsilon}
        if args.plant != "none" and args.kappa is None:
            raise RunError("--kappa is required when planting")
        out = _run_dir(args, "gen-graph")
        rng = np.random.default_rng(derive_seed(args.seed, "gen-graph"))
        if args.plant == "none":
            inst = er_generate(args.m, rng)
            meta = {"m": args.m, "planted": False, "seed": args.seed}
        else:
            seed_graph = DenseSeed(args.plant, args.kappa, args.epsilon)
            inst = plant(args.m, seed_graph, rng)
            meta = {
                "m": args.m,
                "planted": True,
                "kind": args.plant,
                "kappa": args.kappa,
                "epsilon": args.epsilon,
                "K": inst.planted_set.tolist(),
                "seed": args.seed,
            }
        target = out / "graph.txt"
        io.write_graph(target, inst.graph.adjacency)
        io.write_json(io.sidecar_path(target), meta)
    _echo_config(out, f"gen {args.what}", args.seed, params)
    print(target)
    return 0


def cmd_certify(args) -> int:
    X = io.read_matrix(args.matrix)
    params = RipParams(args.k, args.theta)
    try:
        outcome = get_certifier(args.certifier, args.sigma)(X, params)
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(outcome.to_dict()))
    return 0


def _reduction_config(args, m: int) -> ReductionConfig:
    obj = {k: v for k, v in _load_config(args.config).items()}
    obj["m"] = m
    for key, flag in (("kappa", args.kappa), ("L", args.L), ("beta", args.beta), ("distribution", args.dist)):
        if flag is not None:
            obj[key] = flag
    if args.p is not None:
        obj["p_rule"] = {"explicit": args.p}
    if "kappa" not in obj:
        raise RunError("kappa must be given via --kappa or --config")
    return ReductionConfig.from_json(obj)


def cmd_reduce(args) -> int:
    from ripforge.graphs import Graph

    G = Graph(io.read_graph(args.graph))
    cfg = _reduction_config(args, G.m)
    sidecar = io.sidecar_path(args.graph)
    meta = io.read_json(sidecar) if sidecar.exists() else None
    if args.witness and (meta is None or not meta.get("planted")):
        raise RunError(
            f"--witness is a diagnostic mode that needs the planted set K; no planted sidecar at {sidecar}"
        )
    out = _run_dir(args, "reduce")
    rng = np.random.default_rng(derive_seed(args.seed, "reduce"))
    X, trace = reduce(G, cfg, rng)
    io.write_matrix(out / "X.ripm", X)
    report = {"dims": trace.dims._asdict(), "config": cfg.to_json()}
    if args.certifier:
        if args.theta is None:
            raise RunError("--theta is required with --certifier")
        try:
            outcome = get_certifier(args.certifier, args.sigma)(X, RipParams(trace.dims.k, args.theta))
        except RegimeError as exc:
            raise RunError(str(exc)) from None
        report["certifier"] = dict(outcome.to_dict(), name=args.certifier)
        report["distinguisher"] = 1 - int(outcome.certified)
    if args.witness:
        eps = args.epsilon if args.epsilon is not None else meta.get("epsilon")
        w = witness_quadratic_form(trace, np.asarray(meta["K"]), float(eps))
        report["witness"] = {"value": w.value, "k1": w.k1, "rows_in_K": int(w.rows.size), "epsilon": eps}
    if args.trace:
        tdir = out / "trace"
        tdir.mkdir(exist_ok=True)
        io.write_matrix(tdir / "A.ripm", trace.A.astype(np.float64))
        io.write_matrix(tdir / "Z.ripm", trace.Z)
        io.write_json(tdir / "U.json", trace.U.tolist())
        io.write_json(tdir / "W.json", trace.W.tolist())
        if meta is not None and meta.get("planted"):
            io.write_json(tdir / "K.json", meta["K"])
    io.write_json(out / "report.json", report)
    _echo_config(out, "reduce", args.seed, {"graph": str(args.graph), **cfg.to_json()})
    print(json.dumps(report, sort_keys=True))
    return 0


def _experiment_kwargs(name: str, params: dict) -> dict:
    fn = harness.EXPERIMENTS[name]
    sig = inspect.signature(fn)
    accepted = set(sig.parameters) - {"trials", "seed", "jobs"}
    kwargs = dict(params)
    if "cfg" in accepted:
        red = {k: kwargs.pop(k) for k in list(kwargs) if k in REDUCTION_KEYS}
        if "epsilon" in kwargs and name == "reduction-null":
            red["epsilon"] = kwargs.pop("epsilon")
        kwargs["cfg"] = ReductionConfig.from_json(red)
    unknown = set(kwargs) - accepted
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
    missing = [
        p.name for p in sig.parameters.values()
        if p.default is inspect.Parameter.empty and p.name not in kwargs and p.name not in ("trials", "seed", "jobs")
    ]
    if missing:
        raise ValueError(f"missing parameters for {name}: {missing}")
    return kwargs


def cmd_experiment(args) -> int:
    config = _load_config(args.config)
    params = dict(config.get("params", {}) if "params" in config else config)
    for key in ("trials", "seed", "jobs"):
        params.pop(key, None)
    unknown_top = set(config) - {"params", "trials"} if "params" in config else set()
    if unknown_top:
        raise ValueError(f"unknown config fields: {sorted(unknown_top)}")
    params.update(dict(args.param or []))
    trials = args.trials if args.trials is not None else config.get("trials")
    if trials is None:
        raise ValueError("--trials (or 'trials' in the config) is required")
    if int(trials) < 1:
        raise ValueError("trials must be >= 1")
    kwargs = _experiment_kwargs(args.name, params)
    out = _run_dir(args, args.name)
    _echo_config(out, f"experiment {args.name}", args.seed, dict(params, trials=int(trials), jobs=args.jobs))
    result = harness.EXPERIMENTS[args.name](trials=int(trials), seed=args.seed, jobs=args.jobs, **kwargs)
    with open(out / "records.jsonl", "w") as fh:
        for rec in result.records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
    (out / "summary.json").write_text(result.summary.dumps() + "\n")
    if args.csv:
        with open(out / "trials.csv", "w") as fh:
            fh.write("trial,statistic\n")
            fh.writelines(f"{t},{v!r}\n" for t, v in result.csv_rows)
    print("\n".join(result.summary.lines()))
    if result.summary.error:
        return 1
    return 0 if (result.summary.verdict or args.report_only) else 1


# ---------------------------------------------------------------------------


def _add_run_flags(p, seed_required=True):
    p.add_argument("--seed", type=_seed, required=seed_required, help="64-bit master seed")
    p.add_argument("--out-dir", default=None, help="output root (default $RIPFORGE_OUT or ./runs)")
    p.add_argument("--force", action="store_true", help="overwrite an existing run directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ripforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate random matrices or graphs")
    gsub = gen.add_subparsers(dest="what", required=True)
    gm = gsub.add_parser("matrix")
    gm.add_argument("--dist", choices=sorted(DISTRIBUTIONS), required=True)
    gm.add_argument("--n", type=_positive_int, required=True)
    gm.add_argument("--p", type=_positive_int, required=True)
    gm.add_argument("--csv", action="store_true", help="write CSV instead of the binary format")
    _add_run_flags(gm)
    gg = gsub.add_parser("graph")
    gg.add_argument("--m", type=_positive_int, required=True)
    gg.add_argument("--plant", choices=["none", "clique", "random-dense"], default="none")
    gg.add_argument("--kappa", type=_positive_int)
    gg.add_argument("--epsilon", type=float, default=0.5)
    _add_run_flags(gg)

    cert = sub.add_parser("certify", help="run a certifier on a matrix file")
    cert.add_argument("matrix")
    cert.add_argument("--certifier", choices=sorted(CERTIFIERS), required=True)
    cert.add_argument("--k", type=_positive_int, required=True)
    cert.add_argument("--theta", type=float, required=True)
    cert.add_argument("--sigma", type=float, default=1.0)

    red = sub.add_parser("reduce", help="map a graph file to a design matrix")
    red.add_argument("graph")
    red.add_argument("--config", help="ReductionConfig JSON")
    red.add_argument("--kappa", type=_positive_int)
    red.add_argument("--L", type=int)
    red.add_argument("--beta", type=float)
    red.add_argument("--p", type=_positive_int)
    red.add_argument("--dist", choices=sorted(DISTRIBUTIONS))
    red.add_argument("--certifier", choices=sorted(CERTIFIERS))
    red.add_argument("--theta", type=float)
    red.add_argument("--sigma", type=float, default=1.0)
    red.add_argument("--witness", action="store_true", help="diagnostic: needs the planted sidecar")
    red.add_argument("--epsilon", type=float)
    red.add_argument("--trace", action="store_true", help="dump A, Z, U, W (and K) under trace/")
    _add_run_flags(red)

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    exp.add_argument("name", choices=sorted(harness.EXPERIMENTS))
    exp.add_argument("--config")
    exp.add_argument("--trials", type=_positive_int)
    exp.add_argument("--jobs", type=_positive_int, default=1)
    exp.add_argument("--param", type=_param, action="append", metavar="KEY=VALUE", help="override a config field")
    exp.add_argument("--report-only", action="store_true", help="exit 0 even when the verdict fails")
    exp.add_argument("--csv", action="store_true", help="also write trials.csv")
    _add_run_flags(exp)
    return parser


COMMANDS = {"gen": cmd_gen, "certify": cmd_certify, "reduce": cmd_reduce, "experiment": cmd_experiment}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (RunError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
