"""Architecture sweeps and ANN-versus-baseline evaluation on split datasets."""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from . import baseline, data, mlp, optimizer
from .numeric import Matrix, Rng, derive_seed

SCHEMA_VERSION = 1

# sub-seed stream identifiers, see derive_seed
STREAM_SPLIT = 1
STREAM_SWEEP = 2
STREAM_EVAL = 3

DEFAULT_LAYER_GRID = (1, 2, 3, 4, 5, 6, 7, 8)
DEFAULT_NODE_GRID = (5, 10, 20, 40, 80)
ACTIVATIONS = ("relu", "sigmoid", "tanh")


def default_variants(l2_alpha: float = 1e-4) -> dict[str, mlp.NetworkConfig]:
    """ReLU with six hidden layers, sigmoid and tanh with one; 40 nodes each."""
    return {
        "relu": mlp.NetworkConfig(6, 40, mlp.Activation.RELU, l2_alpha),
        "sigmoid": mlp.NetworkConfig(1, 40, mlp.Activation.SIGMOID, l2_alpha),
        "tanh": mlp.NetworkConfig(1, 40, mlp.Activation.TANH, l2_alpha),
    }


def rmse(predictions, targets) -> float:
    p = list(predictions.data) if isinstance(predictions, Matrix) else list(predictions)
    t = list(targets.data) if isinstance(targets, Matrix) else list(targets)
    if len(p) != len(t):
        raise ValueError(f"rmse: {len(p)} predictions but {len(t)} targets")
    if not p:
        raise ValueError("rmse of an empty set")
    return math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(p, t)) / len(p))


def improvement_percent(rmse_baseline: float, rmse_model: float) -> Optional[float]:
    if rmse_baseline == 0:
        return None
    return 100.0 * (rmse_baseline - rmse_model) / rmse_baseline


def config_hash(*parts: Mapping) -> str:
    blob = json.dumps(list(parts), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def fit_network(
    config: mlp.NetworkConfig,
    x: Matrix,
    y: Matrix,
    opt: optimizer.OptimizerConfig,
    seed: int,
    method: str = "lbfgs",
) -> tuple[mlp.Network, optimizer.OptimizeResult]:
    net = mlp.init_weights(config, Rng(seed))
    return optimizer.train(net, x, y, opt, method)


# sweeps


@dataclass
class SweepPoint:
    value: int
    activation: str
    seed: int
    parameter_count: int
    rmse: Optional[float] = None
    iterations: int = 0
    reason: str = ""
    error: Optional[str] = None


@dataclass
class SweepReport:
    axis: str
    grid: list[int]
    activations: list[str]
    points: list[SweepPoint]
    chosen: dict[str, Optional[int]]
    metadata: dict = field(default_factory=dict)

    def rmse_table(self) -> dict[str, list[Optional[float]]]:
        table = {a: [None] * len(self.grid) for a in self.activations}
        pos = {v: i for i, v in enumerate(self.grid)}
        for p in self.points:
            table[p.activation][pos[p.value]] = p.rmse
        return table

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "sweep",
            "axis": self.axis,
            "grid": list(self.grid),
            "activations": list(self.activations),
            "points": [vars(p).copy() for p in self.points],
            "chosen": dict(self.chosen),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SweepReport:
        if d.get("kind") != "sweep":
            raise ValueError("not a sweep report")
        return cls(
            axis=d["axis"],
            grid=list(d["grid"]),
            activations=list(d["activations"]),
            points=[SweepPoint(**p) for p in d["points"]],
            chosen=dict(d["chosen"]),
            metadata=d.get("metadata", {}),
        )


def choose(points: Iterable[SweepPoint]) -> Optional[SweepPoint]:
    """Lowest validation RMSE; ties go to the model with fewer parameters."""
    ok = [p for p in points if p.rmse is not None]
    if not ok:
        return None
    return min(ok, key=lambda p: (p.rmse, p.parameter_count, p.value))


def _sweep(
    split: data.SplitDataset,
    axis: str,
    activations,
    grid: Sequence[int],
    base_config: mlp.NetworkConfig,
    opt: optimizer.OptimizerConfig,
    seed: int,
    method: str,
    jobs: int,
) -> SweepReport:
    if isinstance(activations, (str, mlp.Activation)):
        activations = [activations]
    activations = [mlp.Activation(a).value for a in activations]
    grid = [int(v) for v in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    if len(set(grid)) != len(grid):
        raise ValueError(f"sweep grid has duplicates: {grid}")
    field_name = {"layers": "hidden_layers", "nodes": "hidden_nodes"}[axis]
    split.learn.require_nonempty()
    split.validation.require_nonempty()

    transform = data.fit_transform(split.learn)
    x = transform.apply(split.learn)
    y = split.learn.targets()
    xv = transform.apply(split.validation)
    yv = split.validation.targets()

    tasks = []
    for act in activations:
        for i, v in enumerate(grid):
            cfg = replace(base_config, activation=mlp.Activation(act), **{field_name: v})
            tasks.append((act, i, v, cfg, derive_seed(seed, STREAM_SWEEP, i)))

    def run(task):
        act, _, v, cfg, point_seed = task
        point = SweepPoint(v, act, point_seed, cfg.parameter_count)
        try:
            net, res = fit_network(cfg, x, y, opt, point_seed, method)
            point.rmse = rmse(mlp.predict(net, xv), yv)
            point.iterations = res.iterations
            point.reason = res.reason
        except (optimizer.NumericalError, ArithmeticError) as exc:
            point.error = f"{type(exc).__name__}: {exc}"
        return point

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(run, tasks))
    else:
        points = [run(t) for t in tasks]

    chosen = {}
    for act in activations:
        best = choose(p for p in points if p.activation == act)
        chosen[act] = None if best is None else best.value

    metadata = {
        "seed": seed,
        "split_seed": split.seed,
        "method": method,
        "layer_count": "hidden layers",
        "base_config": base_config.to_dict(),
        "optimizer": opt.to_dict(),
        "config_hash": config_hash(base_config.to_dict(), opt.to_dict(), {"method": method}),
        "n_learn": len(split.learn),
        "n_validation": len(split.validation),
        "scored_on": "validation",
    }
    return SweepReport(axis, grid, activations, points, chosen, metadata)


def layer_sweep(
    split: data.SplitDataset,
    activations=ACTIVATIONS,
    layer_grid: Sequence[int] = DEFAULT_LAYER_GRID,
    base_config: mlp.NetworkConfig = mlp.NetworkConfig(),
    opt: optimizer.OptimizerConfig = optimizer.OptimizerConfig(),
    seed: int = 0,
    method: str = "lbfgs",
    jobs: int = 1,
) -> SweepReport:
    """Validation RMSE against the number of hidden layers."""
    return _sweep(split, "layers", activations, layer_grid, base_config, opt, seed, method, jobs)


def node_sweep(
    split: data.SplitDataset,
    activations=ACTIVATIONS,
    node_grid: Sequence[int] = DEFAULT_NODE_GRID,
    base_config: mlp.NetworkConfig = mlp.NetworkConfig(),
    opt: optimizer.OptimizerConfig = optimizer.OptimizerConfig(),
    seed: int = 0,
    method: str = "lbfgs",
    jobs: int = 1,
) -> SweepReport:
    """Validation RMSE against the number of nodes per hidden layer."""
    return _sweep(split, "nodes", activations, node_grid, base_config, opt, seed, method, jobs)


# evaluation


@dataclass
class EvalRow:
    area: str
    frequency: Optional[float]  # None marks the pooled overall row
    n_test: int
    n_baseline: int
    rmse_baseline: float
    rmse: dict[str, float]
    improvement: dict[str, Optional[float]]


@dataclass
class EvalReport:
    variants: list[str]
    rows: list[EvalRow]
    models: dict[str, dict]
    baselines: dict[str, dict]
    metadata: dict = field(default_factory=dict)

    @property
    def overall(self) -> EvalRow:
        return self.rows[-1]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "evaluation",
            "variants": list(self.variants),
            "rows": [vars(r).copy() for r in self.rows],
            "models": self.models,
            "baselines": self.baselines,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> EvalReport:
        if d.get("kind") != "evaluation":
            raise ValueError("not an evaluation report")
        return cls(
            variants=list(d["variants"]),
            rows=[EvalRow(**r) for r in d["rows"]],
            models=d["models"],
            baselines=d["baselines"],
            metadata=d.get("metadata", {}),
        )


def _row(area, frequency, residuals, baseline_residuals, variants) -> EvalRow:
    rb = math.sqrt(math.fsum(r * r for r in baseline_residuals) / len(baseline_residuals))
    per = {}
    for v in variants:
        res = residuals[v]
        per[v] = math.sqrt(math.fsum(r * r for r in res) / len(res))
    return EvalRow(
        area=area,
        frequency=frequency,
        n_test=len(residuals[variants[0]]) if variants else 0,
        n_baseline=len(baseline_residuals),
        rmse_baseline=rb,
        rmse=per,
        improvement={v: improvement_percent(rb, per[v]) for v in variants},
    )


def evaluate(
    split: data.SplitDataset,
    configs: Mapping[str, mlp.NetworkConfig] | Sequence[mlp.NetworkConfig] | None = None,
    opt: optimizer.OptimizerConfig = optimizer.OptimizerConfig(),
    seed: int = 0,
    method: str = "lbfgs",
    baseline_variant: str = "joint",
    baseline_protocol: str = "test",
) -> EvalReport:
    """Test-split RMSE of each ANN variant and of the log-distance baseline.

    Each area gets its own feature scaling, networks and baseline, all fitted
    on that area's learn split. Rows cover every (area, frequency) pair plus a
    final row pooling all residuals. With ``baseline_protocol="all"`` the
    baseline is fitted and scored on all of an area's samples instead of the
    test split.
    """
    if configs is None:
        configs = default_variants()
    if not isinstance(configs, Mapping):
        named = {}
        for cfg in configs:
            name = cfg.activation.value
            k = 2
            while name in named:
                name = f"{cfg.activation.value}_{k}"
                k += 1
            named[name] = cfg
        configs = named
    if baseline_protocol not in ("test", "all"):
        raise ValueError(f"unknown baseline protocol {baseline_protocol!r}")
    variants = list(configs)
    split.learn.require_nonempty()
    split.test.require_nonempty()

    full = split.all()
    rows: list[EvalRow] = []
    models: dict[str, dict] = {v: {"config": configs[v].to_dict(), "areas": {}} for v in variants}
    baselines: dict[str, dict] = {}
    pooled = {v: [] for v in variants}
    pooled_base: list[float] = []

    for area_index, area in enumerate(full.areas()):
        in_area = lambda s, a=area: s.area == a
        learn = split.learn.where(in_area)
        test = split.test.where(in_area)
        if not len(learn) or not len(test):
            raise data.DataError(f"area {area!r} has no learn or no test samples")
        transform = data.fit_transform(learn)
        x, y = transform.apply(learn), learn.targets()
        xt = transform.apply(test)
        yt = list(test.targets().data)

        residuals = {}
        for i, name in enumerate(variants):
            model_seed = derive_seed(seed, STREAM_EVAL, area_index, i)
            net, res = fit_network(configs[name], x, y, opt, model_seed, method)
            pred = mlp.predict(net, xt).data
            residuals[name] = [p - t for p, t in zip(pred, yt)]
            models[name]["areas"][area] = {"seed": model_seed, **res.summary()}

        if baseline_protocol == "all":
            base_ds = full.where(in_area)
            lm = baseline.fit_ols(base_ds, variant=baseline_variant)
        else:
            base_ds = test
            lm = baseline.fit_ols(learn, variant=baseline_variant)
        baselines[area] = lm.to_dict()
        base_res = [p - s.path_loss for p, s in zip(lm.predict_dataset(base_ds), base_ds.samples)]

        for f in test.frequencies():
            idx = [j for j, s in enumerate(test.samples) if s.frequency == f]
            bidx = [j for j, s in enumerate(base_ds.samples) if s.frequency == f]
            rows.append(_row(
                area, f,
                {v: [residuals[v][j] for j in idx] for v in variants},
                [base_res[j] for j in bidx],
                variants,
            ))
        for v in variants:
            pooled[v].extend(residuals[v])
        pooled_base.extend(base_res)

    rows.append(_row("all", None, pooled, pooled_base, variants))
    hashes = {
        v: config_hash(configs[v].to_dict(), opt.to_dict(), {"method": method}) for v in variants
    }
    for v in variants:
        models[v]["config_hash"] = hashes[v]
    metadata = {
        "seed": seed,
        "split_seed": split.seed,
        "method": method,
        "optimizer": opt.to_dict(),
        "baseline_variant": baseline_variant,
        "baseline_protocol": baseline_protocol,
        "n_learn": len(split.learn),
        "n_validation": len(split.validation),
        "n_test": len(split.test),
        "scored_on": "test",
    }
    return EvalReport(variants, rows, models, baselines, metadata)
