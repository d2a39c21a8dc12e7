"""Config-driven region-counting experiments over initialisation and training."""
from __future__ import annotations

import csv
import json
import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from .data import Dataset, corrupt_labels, default_mnist_paths, load_idx, make_memorization_dataset
from .errors import DegenerateSliceError
from .network import InitSpec, he_init
from .regions import AffineSlice, default_window, enumerate_regions, square_window
from .svg import SvgStyle, render_svg
from .training import TrainConfig, train

log = logging.getLogger(__name__)

MIN_ANGLE = 1e-6


def slice_through_points(p1, p2, include_origin: bool = True, p0=None) -> AffineSlice:
    """Plane through the origin and ``p1``, ``p2`` (or through ``p0, p1, p2``)."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if include_origin:
        origin = np.zeros_like(p1)
    else:
        if p0 is None:
            raise ValueError("a plane not through the origin needs a third point p0")
        origin = np.asarray(p0, dtype=np.float64)
    a, b = p1 - origin, p2 - origin
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DegenerateSliceError("spanning vector is zero")
    e1 = a / na
    r = b - (b @ e1) * e1
    if np.linalg.norm(r) / nb <= np.sin(MIN_ANGLE):
        raise DegenerateSliceError("spanning vectors are (nearly) collinear")
    e2 = r / np.linalg.norm(r)
    e2 -= (e2 @ e1) * e1
    e2 /= np.linalg.norm(e2)
    return AffineSlice(origin, np.stack([e1, e2]))


def line_through_points(p, include_origin: bool = True, p0=None) -> AffineSlice:
    p = np.asarray(p, dtype=np.float64)
    origin = np.zeros_like(p) if include_origin else np.asarray(p0, dtype=np.float64)
    d = p - origin
    n = np.linalg.norm(d)
    if n == 0:
        raise DegenerateSliceError("line direction is zero")
    return AffineSlice(origin, (d / n)[None])


@dataclass
class ExperimentConfig:
    widths: list = field(default_factory=lambda: [32, 32, 32])
    init: dict = field(default_factory=lambda: {"weight_scale": 1.0, "bias_std": 1e-3})
    task: dict = field(default_factory=lambda: {"kind": "memorize2d", "n_points": 1000})
    train: dict = field(default_factory=lambda: {"epochs": 0, "checkpoints": [0]})
    slices: dict = field(default_factory=lambda: {"policy": "auto", "count": 1})
    runs: int = 5
    seed: int = 0
    output_dir: str | None = None
    svg_epochs: list = field(default_factory=list)
    workers: int = 1
    budget: int | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if int(self.slices.get("count", 1)) < 1:
            raise ValueError("slice count must be >= 1")

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(json.loads(Path(path).read_text()))

    def train_config(self, seed) -> TrainConfig:
        t = dict(self.train)
        t.setdefault("checkpoints", [0])
        t["checkpoints"] = tuple(t["checkpoints"])
        if "betas" in t:
            t["betas"] = tuple(t["betas"])
        return TrainConfig(seed=seed, **t)


@dataclass
class CountSeries:
    epochs: list
    mean_count: list
    std_count: list
    mean_accuracy: list
    predicted: float
    rows: list = field(repr=False, default_factory=list)
    failed_runs: list = field(default_factory=list)


def _stream(seed, run, tag):
    return np.random.default_rng(np.random.SeedSequence([seed, run, *tag.encode()]))


def load_task(task: dict, seed: int, run: int = 0) -> Dataset:
    kind = task["kind"]
    if kind == "memorize2d":
        return make_memorization_dataset(int(task.get("n_points", 1000)),
                                         int(task.get("input_dim", 2)), seed=seed)
    if kind not in ("mnist", "corrupted-mnist"):
        raise ValueError(f"unknown task {kind!r}")
    paths = default_mnist_paths(task.get("root"))
    ds = load_idx(task.get("images", paths[0]), task.get("labels", paths[1]))
    if task.get("subset"):
        idx = np.random.default_rng(seed).choice(len(ds), int(task["subset"]), replace=False)
        ds = ds.subset(np.sort(idx))
    if kind == "corrupted-mnist":
        ds = corrupt_labels(ds, float(task.get("p", 0.0)), seed=seed * 1000 + run)
    return ds


def choose_slices(ds: Dataset, policy: str, count: int, rng, B=None):
    """Slices plus their windows and the defining data points (slice coordinates)."""
    if policy == "auto":
        policy = "input-plane" if ds.input_dim == 2 else "origin-plane"
    out = []
    for _ in range(count):
        if policy == "input-plane":
            slc = AffineSlice.coordinate_plane(ds.input_dim, 2)
            out.append((slc, square_window(3.0 if B is None else B), None))
            continue
        n_pts = {"origin-plane": 2, "three-point-plane": 3, "origin-line": 1}[policy]
        for _attempt in range(100):
            idx = rng.choice(len(ds), n_pts, replace=False)
            pts = ds.inputs[idx]
            try:
                if policy == "origin-plane":
                    slc = slice_through_points(pts[0], pts[1], True)
                elif policy == "three-point-plane":
                    slc = slice_through_points(pts[1], pts[2], False, p0=pts[0])
                else:
                    slc = line_through_points(pts[0])
                break
            except DegenerateSliceError:
                continue
        else:
            raise DegenerateSliceError("could not find a non-degenerate slice")
        window = default_window(slc, pts, B=B)
        out.append((slc, window, slc.project(pts)))
    return out


def _run_one(cfg: ExperimentConfig, run: int, out_dir):
    ds = load_task(cfg.task, cfg.seed, run)
    n_out = ds.n_classes
    spec = InitSpec(weight_scale=float(cfg.init.get("weight_scale", 1.0)),
                    bias_std=float(cfg.init.get("bias_std", 1e-3)),
                    seed=int(np.random.SeedSequence([cfg.seed, run, 1]).generate_state(1)[0]))
    net = he_init(ds.input_dim, list(cfg.widths) + [n_out], spec)
    slices = choose_slices(ds, cfg.slices.get("policy", "auto"), int(cfg.slices.get("count", 1)),
                           _stream(cfg.seed, run, "slices"), B=cfg.slices.get("B"))
    rows = []
    svg_epochs = {float(e) for e in cfg.svg_epochs}

    def hook(cp):
        for si, (slc, window, pts) in enumerate(slices):
            census = enumerate_regions(cp.network, slc, window, merge=False, budget=cfg.budget,
                                       degenerate="assign", retain_cells=bool(svg_epochs))
            rows.append({"run": run, "slice": si, "epoch": cp.epoch,
                         "activation_count": census.activation_count,
                         "accuracy": cp.accuracy, "loss": cp.loss,
                         "discarded_slivers": census.discarded_slivers,
                         "degenerate_events": census.degenerate_events})
            if out_dir is not None and cp.epoch in svg_epochs and si == 0:
                snap = Path(out_dir) / "snapshots"
                snap.mkdir(parents=True, exist_ok=True)
                doc = render_svg(census, SvgStyle(points=pts, title=f"run {run} epoch {cp.epoch:g}"))
                (snap / f"run{run}_slice{si}_epoch{cp.epoch:g}.svg").write_text(doc)

    train(net, ds, cfg.train_config(int(np.random.SeedSequence([cfg.seed, run, 2]).generate_state(1)[0])), hook)
    return rows


def _run_safe(args):
    cfg, run, out_dir = args
    try:
        return run, _run_one(cfg, run, out_dir), None
    except Exception as exc:  # recorded, never silently dropped
        log.error("run %d failed: %s", run, exc)
        return run, [], f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"


def aggregate(rows, n_epochs=None):
    """Mean/std over runs of the per-run, slice-averaged counts, per checkpoint."""
    per = {}
    for r in rows:
        per.setdefault((r["epoch"], r["run"]), []).append(r)
    epochs = sorted({e for e, _ in per})
    means, stds, accs = [], [], []
    for e in epochs:
        run_counts = [np.mean([r["activation_count"] for r in per[k]]) for k in sorted(per) if k[0] == e]
        run_accs = [per[k][0]["accuracy"] for k in sorted(per) if k[0] == e]
        means.append(float(np.mean(run_counts)))
        stds.append(float(np.std(run_counts)))
        accs.append(float(np.mean(run_accs)))
    return epochs, means, stds, accs


def run_experiment(cfg: ExperimentConfig) -> CountSeries:
    t0 = time.perf_counter()
    out_dir = Path(cfg.output_dir) if cfg.output_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, r, out_dir) for r in range(cfg.runs)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_safe, jobs))
    else:
        results = [_run_safe(j) for j in jobs]
    results.sort(key=lambda t: t[0])
    rows = [row for _, rs, _ in results for row in rs]
    failed = [{"run": r, "error": err} for r, _, err in results if err]
    epochs, means, stds, accs = aggregate(rows)

    k = 1 if cfg.slices.get("policy") == "origin-line" else 2
    n_neurons = int(sum(cfg.widths))
    series = CountSeries(epochs, means, stds, accs,
                         predicted=bounds.expected_count_prediction(n_neurons, k),
                         rows=rows, failed_runs=failed)
    if out_dir is not None:
        write_outputs(series, cfg, out_dir, time.perf_counter() - t0)
    return series


def write_outputs(series: CountSeries, cfg: ExperimentConfig, out_dir: Path, wall_time=0.0):
    with open(out_dir / "series.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["checkpoint", "mean_count", "std_count", "mean_acc"])
        for row in zip(series.epochs, series.mean_count, series.std_count, series.mean_accuracy):
            w.writerow(row)
    if series.rows:
        with open(out_dir / "runs.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(series.rows[0]))
            w.writeheader()
            w.writerows(series.rows)
    meta = {
        "config": asdict(cfg),
        "predicted_count": series.predicted,
        "failed_runs": series.failed_runs,
        "wall_time": wall_time,
        "seed_streams": {"init": "SeedSequence([seed, run, 1])", "train": "SeedSequence([seed, run, 2])",
                         "slices": "named stream 'slices' per run"},
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2, default=str))


def read_runs_csv(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["run"] = int(r["run"])
        r["slice"] = int(r["slice"])
        r["epoch"] = float(r["epoch"])
        r["activation_count"] = int(r["activation_count"])
        r["accuracy"] = float(r["accuracy"])
    return rows
