"""``mvtreelet`` command-line front end.

Every command writes ``result.json`` (command, fully resolved config, result
rows, warnings) into ``--output`` when given, and prints it to stdout
otherwise. Failures print ``{"error": {"kind": ..., "message": ...}}`` to
stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

import numpy as np

from . import experiments as ex
from .denoise import denoise, denoise_error
from .errors import InputNotFoundError, MvTreeletError, ParameterError
from .io import read_matrix, write_heatmap, write_matrix
from .linalg import compute_covariance, pearson_correlation
from .mvtt import ViewSet, mvtt_transform
from .srm import srm_fit, srm_objective, srm_reconstruct
from .synthgraph import (
    DEFAULT_INITIATOR,
    KroneckerSpec,
    box_filter_coarsen,
    connected_components,
    connection_density,
    generate_views,
)
from .treelet import default_levels, treelet_transform

COMMANDS = ("generate", "treelet", "mvtt", "denoise", "srm", "convergence", "stability",
            "rate", "compare-denoise", "srm-sweep", "shared-response", "coarsen", "metrics")
RANDOMIZED = {"generate", "convergence", "stability", "rate", "compare-denoise"}

EXIT_CODES = {
    "internal": 1,
    "usage": 2,
    "missing-seed": 2,
    "input-not-found": 3,
    "parse": 4,
    "non-finite": 5,
    "dimension": 6,
    "parameter": 7,
    "degenerate": 8,
    "io": 9,
}


class UsageError(MvTreeletError):
    kind = "usage"


class MissingSeedError(UsageError):
    kind = "missing-seed"


@dataclass
class RunConfig:
    command: str
    seed: int | None = None
    inputs: list = field(default_factory=list)
    output: str | None = None
    params: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# JSON helpers

def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--input", action="append", default=[],
                        help="matrix CSV file or directory of CSVs; repeatable")
    common.add_argument("--output", help="directory for result.json and artifacts")
    common.add_argument("--epsilon", type=float, nargs="+")
    common.add_argument("--views", type=int, nargs="+")
    common.add_argument("--levels", type=int)
    common.add_argument("--fdr", type=float)
    common.add_argument("--rank", type=int, nargs="+")
    common.add_argument("--collections", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--partitions", type=int)
    common.add_argument("--edge-threshold", type=float)
    common.add_argument("--initiator")
    common.add_argument("--power", type=int)
    common.add_argument("--basis", help="basis matrix CSV (denoise)")
    common.add_argument("--truth", help="noise-free matrix CSV (denoise)")
    common.add_argument("--reference", help="reference matrix CSV (metrics)")
    common.add_argument("--method", action="append", choices=ex.METHODS)
    common.add_argument("--space", action="append", choices=ex.SPACES)
    common.add_argument("--max-iters", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--data", action="store_true",
                        help="treat inputs as n x p data matrices, not covariances")

    parser = argparse.ArgumentParser(prog="mvtreelet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "seed", "input", "output") and v is not None}
    params.pop("data", None)
    if ns.data:
        params["data"] = True
    return RunConfig(command=ns.command, seed=ns.seed, inputs=list(ns.input),
                     output=ns.output, params=params)


# --------------------------------------------------------------------------
# helpers

def _input_files(paths) -> list:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            found = sorted(p.glob("*.csv"))
            if not found:
                raise InputNotFoundError(f"no .csv files in directory {p}")
            files.extend(found)
        elif p.is_file():
            files.append(p)
        else:
            raise InputNotFoundError(f"no such file or directory: {p}")
    return files


def _load_inputs(cfg, data=False) -> list:
    mats = [read_matrix(f) for f in _input_files(cfg.inputs)]
    if data:
        mats = [compute_covariance(m) for m in mats]
    return mats


def _one(values, name, default):
    if values is None:
        return default
    if len(values) != 1:
        raise UsageError(f"--{name} takes a single value for this command")
    return values[0]


def _spec(cfg, eps=0.0, seed=0) -> KroneckerSpec:
    init = cfg.params.get("initiator")
    initiator = read_matrix(init) if init else DEFAULT_INITIATOR.copy()
    return KroneckerSpec(initiator=initiator, power=cfg.params.get("power", 3),
                         noise_level=eps, seed=seed)


def _spec_echo(spec: KroneckerSpec) -> dict:
    return {"initiator": spec.initiator.tolist(), "power": spec.power}


class _Run:
    """Collects the result and artifacts of one command."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.config = {"seed": cfg.seed, "inputs": [str(p) for p in cfg.inputs],
                       "output": cfg.output}
        self.rows = []
        self.summary = {}
        self.warnings = []
        self.matrices = {}
        self.heatmaps = {}

    def artifact(self, stem, m, heatmap=True):
        self.matrices[f"{stem}.csv"] = m
        if heatmap:
            self.heatmaps[f"{stem}.pgm"] = m

    def document(self) -> dict:
        doc = {"command": self.cfg.command, "config": self.config, "rows": self.rows,
               "warnings": self.warnings}
        if self.summary:
            doc["summary"] = self.summary
        if self.matrices or self.heatmaps:
            doc["artifacts"] = sorted(list(self.matrices) + list(self.heatmaps))
        return doc


def _levels(cfg, p):
    return cfg.params.get("levels", default_levels(p))


def _rotation_rows(tb):
    return [{"level": r.level, "j": r.j, "k": r.k, "c": r.c, "s": r.s} for r in tb.rotations]


# --------------------------------------------------------------------------
# commands

def cmd_generate(run, cfg):
    eps = _one(cfg.params.get("epsilon"), "epsilon", 0.0)
    M = _one(cfg.params.get("views"), "views", 1)
    spec = _spec(cfg, eps, cfg.seed)
    views = generate_views(spec, M)
    truth = spec.truth()
    run.config.update(_spec_echo(spec), epsilon=eps, views=M)
    run.artifact("truth", truth)
    for i, V in enumerate(views.views):
        run.artifact(f"view_{i:03d}", V)
        run.rows.append({"view": i, "noise_frobenius": float(np.linalg.norm(V - truth))})


def _transform_common(run, cfg, views, multi):
    p = views[0].shape[0]
    L = _levels(cfg, p)
    run.config.update(levels=L, data=cfg.params.get("data", False))
    tb = mvtt_transform(np.stack(views), L) if multi else treelet_transform(views[0], L)
    run.rows = _rotation_rows(tb)
    run.summary = {"p": p, "levels": tb.levels, "survivor_order": tb.survivor_order}
    run.artifact("basis", tb.basis)


def cmd_treelet(run, cfg):
    mats = _load_inputs(cfg, cfg.params.get("data", False))
    if len(mats) != 1:
        raise UsageError("treelet takes exactly one input matrix")
    _transform_common(run, cfg, mats, multi=False)


def cmd_mvtt(run, cfg):
    mats = _load_inputs(cfg, cfg.params.get("data", False))
    if not mats:
        raise UsageError("mvtt needs at least one --input")
    _transform_common(run, cfg, mats, multi=True)


def cmd_denoise(run, cfg):
    mats = _load_inputs(cfg)
    if not mats:
        raise UsageError("denoise needs at least one --input")
    q = cfg.params.get("fdr", 0.015)
    p = mats[0].shape[0]
    if "basis" in cfg.params:
        basis = read_matrix(cfg.params["basis"])
        L = None
    else:
        L = _levels(cfg, p)
        basis = mvtt_transform(np.stack(mats), L).basis
        run.artifact("basis", basis, heatmap=False)
    truth = read_matrix(cfg.params["truth"]) if "truth" in cfg.params else None
    run.config.update(fdr=q, levels=L, basis=cfg.params.get("basis"),
                      truth=cfg.params.get("truth"))
    for i, X in enumerate(mats):
        Xd, fdr, _ = denoise(X, basis, q, full_output=True)
        row = {"view": i, "threshold": fdr.threshold, "rejected_count": fdr.rejected_count}
        if truth is not None:
            row["error"] = denoise_error(truth, Xd)
            row["noisy_error"] = denoise_error(truth, X)
        if fdr.rejected_count == 0:
            run.warnings.append(f"view {i}: no coefficient passed the FDR test; output is zero")
        run.rows.append(row)
        run.artifact(f"denoised_{i:03d}", Xd)


def cmd_srm(run, cfg):
    mats = _load_inputs(cfg)
    if not mats:
        raise UsageError("srm needs at least one --input")
    p = mats[0].shape[0]
    K = _one(cfg.params.get("rank"), "rank", p)
    max_iters = cfg.params.get("max_iters", 500)
    tol = cfg.params.get("tol", 1e-8)
    seed = cfg.seed if cfg.seed is not None else 0
    run.config.update(rank=K, max_iters=max_iters, tol=tol, seed=seed)
    X = np.stack(mats)
    model = srm_fit(X, K, max_iters=max_iters, tol=tol, seed=seed)
    sq, unsq = srm_objective(model, X)
    run.rows = [{"iteration": i, "objective": v} for i, v in enumerate(model.objective_trace)]
    run.summary = {"objective_squared": sq, "objective_unsquared": unsq,
                   "iterations": model.n_iter}
    run.artifact("shared", model.shared, heatmap=False)
    for i in range(len(mats)):
        run.artifact(f"reconstruction_{i:03d}", srm_reconstruct(model, i))


def _convergence_config(run, cfg):
    spec = _spec(cfg)
    conf = ex.ConvergenceConfig(
        spec=spec,
        M_values=cfg.params.get("views", [1, 5, 25, 100]),
        epsilon_values=cfg.params.get("epsilon", [0.1, 0.2, 0.3, 0.4, 0.5]),
        collections=cfg.params.get("collections", 20),
        L=cfg.params.get("levels", default_levels(spec.initiator.shape[0] ** (spec.power + 1))),
        master_seed=cfg.seed,
    )
    run.config.update(_spec_echo(spec), views=conf.M_values, epsilon=conf.epsilon_values,
                      collections=conf.collections, levels=conf.L)
    return conf


def _records(run, cfg):
    if cfg.inputs:
        files = _input_files(cfg.inputs)
        if len(files) != 1 and not all(f.suffix == ".json" for f in files):
            raise UsageError("expected one convergence result.json")
        doc = json.loads(files[0].read_text())
        return [ex.ConvergenceRecord(**r) for r in doc["rows"]]
    if cfg.seed is None:
        raise MissingSeedError(f"{cfg.command} requires --seed")
    return ex.convergence_experiment(_convergence_config(run, cfg))


def cmd_convergence(run, cfg):
    records = ex.convergence_experiment(_convergence_config(run, cfg))
    run.rows = records
    run.summary = {"spearman_M_vs_E_M": [[e, r] for e, r in ex.convergence_trend(records).items()]}


def cmd_stability(run, cfg):
    run.rows = ex.stability_table(_records(run, cfg))


def cmd_rate(run, cfg):
    run.rows = ex.rate_fits(_records(run, cfg))


def cmd_compare_denoise(run, cfg):
    eps = _one(cfg.params.get("epsilon"), "epsilon", 0.4)
    M = _one(cfg.params.get("views"), "views", 100)
    trials = cfg.params.get("trials", 30)
    q = cfg.params.get("fdr", 0.015)
    spec = _spec(cfg, eps, cfg.seed)
    L = _levels(cfg, spec.initiator.shape[0] ** (spec.power + 1))
    run.config.update(_spec_echo(spec), epsilon=eps, views=M, trials=trials, fdr=q, levels=L)
    res = ex.single_vs_multi_denoise(spec, M, trials, q, L)
    run.rows = res.rows
    run.summary = {"mean_single": res.mean_single, "mean_multi": res.mean_multi,
                   "mean_difference": res.mean_difference, "multi_wins": res.multi_wins}


def _truth_or_spec(run, cfg):
    if cfg.inputs:
        mats = _load_inputs(cfg)
        if len(mats) != 1:
            raise UsageError(f"{cfg.command} takes exactly one input matrix")
        return mats[0]
    spec = _spec(cfg)
    run.config.update(_spec_echo(spec))
    return spec.truth()


def cmd_srm_sweep(run, cfg):
    truth = _truth_or_spec(run, cfg)
    p = truth.shape[0]
    step = max(1, p // 9)
    K_values = cfg.params.get("rank", list(range(step, p + 1, step)))
    M = _one(cfg.params.get("views"), "views", 1)
    max_iters = cfg.params.get("max_iters", 500)
    tol = cfg.params.get("tol", 1e-8)
    run.config.update(rank=K_values, views=M, max_iters=max_iters, tol=tol)
    rows, recon = ex.srm_reconstruction_sweep(truth, K_values, M, max_iters, tol,
                                              return_reconstructions=True)
    run.rows = rows
    for K, R in recon.items():
        run.artifact(f"reconstruction_K{K:03d}", R)


def cmd_shared_response(run, cfg):
    if cfg.inputs:
        views = ViewSet(np.stack(_load_inputs(cfg)))
    else:
        if cfg.seed is None:
            raise MissingSeedError("shared-response on synthetic data requires --seed")
        eps = _one(cfg.params.get("epsilon"), "epsilon", 0.3)
        M = _one(cfg.params.get("views"), "views", 20)
        spec = _spec(cfg, eps, cfg.seed)
        run.config.update(_spec_echo(spec), epsilon=eps, views=M)
        views = generate_views(spec, M)
    split_seed = cfg.seed if cfg.seed is not None else 0
    methods = cfg.params.get("method") or list(ex.METHODS)
    spaces = cfg.params.get("space") or list(ex.SPACES)
    partitions = cfg.params.get("partitions", 5)
    q = cfg.params.get("fdr", 0.01)
    L = _levels(cfg, views.p)
    run.config.update(method=methods, space=spaces, partitions=partitions, fdr=q, levels=L,
                      group_split_seed=split_seed)
    for method in methods:
        for space in (spaces if method != "none" else ["feature"]):
            res = ex.shared_response(views, ex.SharedResponseConfig(
                group_split_seed=split_seed, partitions=partitions, fdr_q=q,
                space=space, method=method, L=L))
            run.rows.append({"method": method, "space": space, "mean": res.mean,
                             "std": res.std, "partitions": res.rows})
            run.warnings.extend(f"{method}/{space}: {n}" for n in res.notes)


def cmd_coarsen(run, cfg):
    A = _truth_or_spec(run, cfg)
    steps = cfg.params.get("levels")
    run.config.update(levels=steps)
    run.artifact("coarsen_0", A)
    run.rows.append({"step": 0, "shape": list(A.shape), "mean": float(A.mean())})
    step = 0
    while (steps is None or step < steps) and A.shape[0] % 3 == 0 and A.shape[1] % 3 == 0:
        A = box_filter_coarsen(A)
        step += 1
        run.artifact(f"coarsen_{step}", A)
        run.rows.append({"step": step, "shape": list(A.shape), "mean": float(A.mean())})
    if steps is not None and step < steps:
        raise ParameterError(f"only {step} coarsening steps possible, {steps} requested")


def cmd_metrics(run, cfg):
    files = _input_files(cfg.inputs)
    if not files:
        raise UsageError("metrics needs at least one --input")
    thr = cfg.params.get("edge_threshold", 0.0)
    ref = read_matrix(cfg.params["reference"]) if "reference" in cfg.params else None
    run.config.update(edge_threshold=thr, reference=cfg.params.get("reference"))
    for f in files:
        A = read_matrix(f)
        row = {"input": str(f), "connection_density": connection_density(A, thr),
               "connected_components": connected_components(A, thr)}
        if ref is not None:
            row["pearson_correlation"] = pearson_correlation(A, ref)
        run.rows.append(row)


HANDLERS = {
    "generate": cmd_generate,
    "treelet": cmd_treelet,
    "mvtt": cmd_mvtt,
    "denoise": cmd_denoise,
    "srm": cmd_srm,
    "convergence": cmd_convergence,
    "stability": cmd_stability,
    "rate": cmd_rate,
    "compare-denoise": cmd_compare_denoise,
    "srm-sweep": cmd_srm_sweep,
    "shared-response": cmd_shared_response,
    "coarsen": cmd_coarsen,
    "metrics": cmd_metrics,
}


def _error_doc(kind, message):
    return dumps({"error": {"kind": kind, "message": message}})


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if cfg.command not in HANDLERS:
            raise UsageError(f"unknown command {cfg.command!r}")
        if cfg.command in RANDOMIZED and cfg.seed is None and not (
                cfg.command in ("stability", "rate") and cfg.inputs):
            raise MissingSeedError(f"{cfg.command} requires --seed")
        r = _Run(cfg)
        HANDLERS[cfg.command](r, cfg)
        text = dumps(r.document())
        if cfg.output:
            out = Path(cfg.output)
            out.mkdir(parents=True, exist_ok=True)
            for name, m in r.matrices.items():
                write_matrix(out / name, m)
            for name, m in r.heatmaps.items():
                write_heatmap(out / name, m)
            (out / "result.json").write_text(text)
        else:
            stdout.write(text)
        return 0
    except MvTreeletError as e:
        stderr.write(_error_doc(e.kind, str(e)))
        return EXIT_CODES.get(e.kind, 1)
    except IndexError as e:
        stderr.write(_error_doc("parameter", str(e)))
        return EXIT_CODES["parameter"]
    except OSError as e:
        stderr.write(_error_doc("io", str(e)))
        return EXIT_CODES["io"]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
