"""Cross-validated benchmark studies.

Two studies share one fold loop:

* ``quality`` encodes each test split and scores the embeddings with the
  metrics in :mod:`spate.metrics`;
* ``qnn`` trains the hybrid classifier of :mod:`spate.qnn` on each training
  split and scores it on the test split.

Scalers, PCA and the SPATE LIF constants are fitted on training rows only.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import data, metrics, qnn
from .encoders import KINDS, EncoderConfig, embed, seed_noise
from .errors import InvalidArgumentError
from .numerics import PcaModel, RngStream, ScalerStats, minmax_fit, pca_fit, standardize_fit
from .spikes import LifConfig

log = logging.getLogger(__name__)

TAG_SPIKES, TAG_PAIRS, TAG_QNN = 1, 2, 3

QUALITY_COLUMNS = ("CKTA", "Fisher", "Inter/Intra", "Sil", "H_norm", "TVpair", "TVpair_norm")
QNN_COLUMNS = ("accuracy", "precision", "recall", "auc")

STUDIES = ("quality", "qnn")
SYNTHETIC = ("moons", "circles", "blobs")
REAL = ("iris", "wine", "cancer", "digits")


@dataclass
class TuningGrid:
    gain: list = field(default_factory=lambda: [1.0, 2.0, 4.0])
    sigma: list = field(default_factory=lambda: [0.0, 0.1])
    v_th: list = field(default_factory=lambda: [0.25, 0.5, 1.0])
    tau: list = field(default_factory=lambda: [0.05, 0.1, 0.2])

    def __post_init__(self):
        for f in fields(self):
            vals = getattr(self, f.name)
            if not vals:
                raise InvalidArgumentError(f"tuning grid axis {f.name!r} is empty")
            floor_ok = (lambda v: v >= 0) if f.name == "sigma" else (lambda v: v > 0)
            if not all(floor_ok(v) for v in vals):
                raise InvalidArgumentError(f"invalid values on grid axis {f.name!r}: {vals}")

    def candidates(self) -> list[dict]:
        """Cartesian product in (gain, sigma, v_th, tau) order; this order breaks ties."""
        return [dict(gain=g, sigma=s, v_th=v, tau=t)
                for g, s, v, t in itertools.product(self.gain, self.sigma, self.v_th, self.tau)]

    def __len__(self):
        return len(self.gain) * len(self.sigma) * len(self.v_th) * len(self.tau)


@dataclass
class SpateSettings:
    """SPATE constants that are never tuned, plus the untuned LIF fallback."""

    T: float = 1.0
    dt: float = 0.02
    n_t: int = 3
    beta_scale: float = 0.5
    seeds: int = 3
    tuning_seeds: int = 1
    gain: float = 2.0
    sigma: float = 0.1
    v_th: float = 0.5
    tau: float = 0.1

    def lif(self, theta: dict | None = None) -> LifConfig:
        base = dict(tau=self.tau, gain=self.gain, sigma=self.sigma, v_th=self.v_th)
        base.update(theta or {})
        return LifConfig(T=self.T, dt=self.dt, n_t=self.n_t, **base)

    def encoder(self, theta: dict | None = None) -> EncoderConfig:
        return EncoderConfig("spate", beta_scale=self.beta_scale, seeds=self.seeds, lif=self.lif(theta))


@dataclass
class DatasetSpec:
    name: str = "moons"
    csv: str | None = None
    label_column: str = "label"
    n: int = 300
    noise: float | None = None
    factor: float = data.CIRCLES_FACTOR
    d: int = 5
    centers: int = 3
    spread: float = data.BLOBS_SPREAD
    seed: int | None = None  # defaults to the experiment seed

    def load(self, default_seed: int = 0) -> data.Dataset:
        seed = default_seed if self.seed is None else self.seed
        if self.csv is not None:
            return data.load_csv(self.csv, self.label_column, name=self.name)
        if self.name == "moons":
            return data.gen_moons(self.n, data.MOONS_NOISE if self.noise is None else self.noise, seed)
        if self.name == "circles":
            return data.gen_circles(self.n, data.CIRCLES_NOISE if self.noise is None else self.noise,
                                    self.factor, seed)
        if self.name == "blobs":
            return data.gen_blobs(self.n, self.d, self.centers, self.spread, seed)
        path = data.default_data_dir() / f"{self.name}.csv"
        return data.load_csv(path, self.label_column, name=self.name)


@dataclass
class Budget:
    """Feature caps (PCA targets) and register sizes per encoder."""

    quality_pca_cap: int = 8
    qnn_angle_features: int = 6
    qnn_angle_qubits: int = 6
    qnn_amplitude_qubits: int = 6
    qnn_spate_features: tuple = (2, 3)


@dataclass
class ExperimentConfig:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    encoders: list = field(default_factory=lambda: list(KINDS))
    study: str = "quality"
    n_folds: int = 5
    seed: int = 42
    tune: bool = True
    grid: TuningGrid = field(default_factory=TuningGrid)
    spate: SpateSettings = field(default_factory=SpateSettings)
    budget: Budget = field(default_factory=Budget)
    n_pairs: int = metrics.DEFAULT_N_PAIRS
    train: qnn.TrainConfig = field(default_factory=qnn.TrainConfig)

    def __post_init__(self):
        if self.n_folds < 2:
            raise InvalidArgumentError(f"need at least 2 folds, got {self.n_folds}")
        if self.study not in STUDIES:
            raise InvalidArgumentError(f"unknown study {self.study!r}; choose from {STUDIES}")
        self.encoders = [e.lower() for e in self.encoders]
        bad = [e for e in self.encoders if e not in KINDS]
        if bad or not self.encoders:
            raise InvalidArgumentError(f"unknown encoder(s) {bad}; choose from {KINDS}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["budget"]["qnn_spate_features"] = list(self.budget.qnn_spate_features)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        sub = {"dataset": DatasetSpec, "grid": TuningGrid, "spate": SpateSettings,
               "budget": Budget, "train": qnn.TrainConfig}
        for key, typ in sub.items():
            if key in d and isinstance(d[key], dict):
                known = {f.name for f in fields(typ)}
                extra = set(d[key]) - known
                if extra:
                    raise InvalidArgumentError(f"unknown {key} option(s): {sorted(extra)}")
                d[key] = _construct(typ, d[key])
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidArgumentError(f"unknown config option(s): {sorted(extra)}")
        if "budget" in d:
            d["budget"].qnn_spate_features = tuple(d["budget"].qnn_spate_features)
        return _construct(cls, d)


def _construct(typ, kwargs):
    try:
        return typ(**kwargs)
    except TypeError as exc:
        raise InvalidArgumentError(f"bad {typ.__name__} options: {exc}") from exc


def provenance(cfg: ExperimentConfig) -> dict:
    """Design choices that the reported numbers depend on."""
    return {
        "generator_defaults": {
            "moons_noise": data.MOONS_NOISE, "circles_noise": data.CIRCLES_NOISE,
            "circles_factor": data.CIRCLES_FACTOR, "blobs_spread": data.BLOBS_SPREAD,
            "blobs_center_box": list(data.BLOBS_CENTER_BOX),
        },
        "bit_order": "qubit 0 is the most significant bit",
        "standardize": "population std, constant features -> 0",
        "minmax": "train bounds, test clamped to [0, 1]",
        "pca": "fit per fold on training rows, applied only when d exceeds the cap",
        "quality_register": "angle n=d_enc, amplitude n=d_enc (pad/truncate), SPATE n=d_enc+n_t",
        "qnn_register": {
            "angle": f"PCA to <= {cfg.budget.qnn_angle_features} features on a {cfg.budget.qnn_angle_qubits}-qubit register (unused wires idle)",
            "amplitude": f"{cfg.budget.qnn_amplitude_qubits} qubits, pad/truncate to {2 ** cfg.budget.qnn_amplitude_qubits}",
            "spate": f"{cfg.budget.qnn_spate_features[0]}..min(d, {cfg.budget.qnn_spate_features[1]}) PCA features chosen with the LIF constants by the tuning objective (upper bound when untuned) + {cfg.spate.n_t} time qubits",
        },
        "tuning_objective": "CKTA + Silhouette on train-split embeddings, first maximum in grid order",
        "tuning_seeds": cfg.spate.tuning_seeds,
        "tuning_scope": "SPATE only; angle/amplitude expose no tunable hyperparameters",
        "rbf_gamma": "1 / (2 * median_pairwise_distance^2 + eps), fallback 1",
        "tvpair_pairs": cfg.n_pairs,
        "readout_qubits": "first ceil(log2 C) qubits",
        "training_steps": "minibatch updates, not epochs",
        "cross_entropy_log": "natural",
        "ansatz_init": "uniform [0, 2 pi)",
        "aggregate_std": "population (ddof=0) over folds",
        "eps": 1e-10,
    }


# -- preprocessing -------------------------------------------------------------

@dataclass
class FoldTransform:
    scaler: ScalerStats
    pca: PcaModel | None = None
    minmax: ScalerStats | None = None

    def standardized(self, X):
        Z = self.scaler.apply(X)
        return Z if self.pca is None else self.pca.transform(Z)

    def apply(self, X):
        Z = self.standardized(X)
        return Z if self.minmax is None else self.minmax.apply(Z)


def fit_transform(X_train, cap: int, minmax: bool = False) -> FoldTransform:
    """Standardize, PCA to ``cap`` components when ``d > cap``, optionally MinMax."""
    scaler = standardize_fit(X_train)
    Z = scaler.apply(X_train)
    pca = pca_fit(Z, cap) if Z.shape[1] > cap else None
    if pca is not None:
        Z = pca.transform(Z)
    mm = minmax_fit(Z) if minmax else None
    return FoldTransform(scaler, pca, mm)


def sample_streams(seed: int, indices) -> list[RngStream]:
    """One spike-noise stream per sample, keyed by its row in the full dataset."""
    root = RngStream(seed).child(TAG_SPIKES)
    return [root.child(int(i)) for i in indices]


# -- tuning --------------------------------------------------------------------

def tuning_score(P, y) -> float:
    return metrics.ckta(P, y) + metrics.silhouette(P, y)


def tune_spate_fold(X_train, y_train, grid: TuningGrid, settings: SpateSettings,
                    streams) -> tuple[dict, list[float]]:
    """Pick the grid point maximising CKTA + Silhouette on the training split.

    ``X_train`` is already MinMax-scaled. Returns the winning LIF constants
    and the score of every candidate in grid order.
    """
    y_train = np.asarray(y_train)
    if len(np.unique(y_train)) < 2:
        raise InvalidArgumentError("tuning needs at least two classes in the training split")
    X_train = np.asarray(X_train, dtype=float)
    cands = grid.candidates()
    noise = None
    if any(c["sigma"] > 0 for c in cands):
        noise = seed_noise(streams, X_train.shape[1], settings.lif().n_steps, settings.tuning_seeds)
    scores = []
    for theta in cands:
        cfg = settings.encoder(theta)
        P = embed(X_train, cfg, streams, seeds=settings.tuning_seeds, noise=noise)
        scores.append(tuning_score(P, y_train))
    best = int(np.argmax(scores))  # first maximum
    return cands[best], scores


# -- reports -------------------------------------------------------------------

@dataclass
class Report:
    """Per-fold values of one (dataset, encoder) pair."""

    dataset: str
    encoder: str
    n_qubits: int
    per_fold: dict
    fold_info: list = field(default_factory=list)

    columns = ()

    @property
    def n_folds(self) -> int:
        return len(next(iter(self.per_fold.values())))

    def aggregate(self) -> dict:
        return {k: {"mean": float(np.mean(v)), "std": float(np.std(v))} for k, v in self.per_fold.items()}

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "encoder": self.encoder,
            "n_qubits": self.n_qubits,
            "folds": self.n_folds,
            "aggregate": self.aggregate(),
            "per_fold": {k: list(map(float, v)) for k, v in self.per_fold.items()},
            "fold_info": self.fold_info,
        }


class MetricReport(Report):
    columns = QUALITY_COLUMNS


class PerfReport(Report):
    columns = QNN_COLUMNS


def _collect(cls, ds_name, enc, fold_results):
    per_fold = {c: [fr[enc]["values"][c] for fr in fold_results] for c in cls.columns}
    info = [fr[enc]["info"] for fr in fold_results]
    return cls(ds_name, enc, fold_results[0][enc]["n_qubits"], per_fold, info)


# -- fold workers ---------------------------------------------------------------

def quality_fold(ds: data.Dataset, train_idx, test_idx, cfg: ExperimentConfig, fold: int) -> dict:
    X_tr, X_te = ds.X[train_idx], ds.X[test_idx]
    y_tr, y_te = ds.y[train_idx], ds.y[test_idx]
    tf = fit_transform(X_tr, cfg.budget.quality_pca_cap, minmax=True)
    d = tf.standardized(X_tr[:1]).shape[1]
    out = {}
    for e_idx, enc in enumerate(cfg.encoders):
        info = {"fold": fold, "d_enc": d}
        if enc == "spate":
            M_tr, M_te = tf.apply(X_tr), tf.apply(X_te)
            theta = None
            if cfg.tune:
                theta, scores = tune_spate_fold(M_tr, y_tr, cfg.grid, cfg.spate, sample_streams(cfg.seed, train_idx))
                info["theta"] = theta
                info["tuning_score"] = max(scores)
            ecfg = cfg.spate.encoder(theta)
            P = embed(M_te, ecfg, sample_streams(cfg.seed, test_idx))
            n = d + cfg.spate.n_t
        else:
            ecfg = EncoderConfig(enc, n_qubits=d)
            P = embed(tf.standardized(X_te), ecfg)
            n = d
        rng = RngStream(cfg.seed).child(TAG_PAIRS, fold, e_idx)
        values = metrics.all_metrics(P, y_te, n, cfg.n_pairs, rng)
        out[enc] = {"values": values, "info": info, "n_qubits": n}
        log.info("quality fold %d %s %s", fold, enc, {k: round(v, 4) for k, v in values.items()})
    return out


def qnn_encoder_setup(enc: str, X_tr, y_tr, train_idx, cfg: ExperimentConfig):
    """Fit preprocessing for one encoder's qubit budget; tune SPATE if enabled."""
    b = cfg.budget
    info = {}
    if enc == "angle":
        tf = fit_transform(X_tr, b.qnn_angle_features)
        return tf, EncoderConfig("angle", n_qubits=b.qnn_angle_qubits), info
    if enc == "amplitude":
        tf = fit_transform(X_tr, b.quality_pca_cap)
        return tf, EncoderConfig("amplitude", n_qubits=b.qnn_amplitude_qubits), info
    lo, hi = b.qnn_spate_features
    d = X_tr.shape[1]
    if d < lo:
        raise InvalidArgumentError(f"SPATE budget needs at least {lo} features, dataset has {d}")
    if not cfg.tune:
        tf = fit_transform(X_tr, hi, minmax=True)
        info["d_enc"] = min(d, hi)
        return tf, cfg.spate.encoder(), info
    # the feature-qubit count is chosen with the LIF constants, by the same
    # train-only objective; ties go to the smaller register
    streams = sample_streams(cfg.seed, train_idx)
    best = None
    for k in range(lo, min(d, hi) + 1):
        tf = fit_transform(X_tr, k, minmax=True)
        theta, scores = tune_spate_fold(tf.apply(X_tr), y_tr, cfg.grid, cfg.spate, streams)
        if best is None or max(scores) > best[2]:
            best = (tf, theta, max(scores), k)
    tf, theta, score, k = best
    info.update(theta=theta, tuning_score=score, d_enc=k)
    return tf, cfg.spate.encoder(theta), info


def qnn_fold(ds: data.Dataset, train_idx, test_idx, cfg: ExperimentConfig, fold: int) -> dict:
    X_tr, X_te = ds.X[train_idx], ds.X[test_idx]
    y_tr, y_te = ds.y[train_idx], ds.y[test_idx]
    out = {}
    for e_idx, enc in enumerate(cfg.encoders):
        tf, ecfg, info = qnn_encoder_setup(enc, X_tr, y_tr, train_idx, cfg)
        info["fold"] = fold
        streams_tr = sample_streams(cfg.seed, train_idx) if enc == "spate" else None
        streams_te = sample_streams(cfg.seed, test_idx) if enc == "spate" else None
        rng = RngStream(cfg.seed).child(TAG_QNN, fold, e_idx)
        model = qnn.train(tf.apply(X_tr), y_tr, ecfg, cfg.train, streams_tr, ds.n_classes, rng)
        values = qnn.evaluate(tf.apply(X_te), y_te, model, streams_te)
        info["final_loss"] = model.loss_trace[-1]
        out[enc] = {"values": values, "info": info, "n_qubits": model.n_qubits}
        log.info("qnn fold %d %s %s", fold, enc, {k: round(v, 4) for k, v in values.items()})
    return out


def _run_folds(worker, ds, plan, cfg, jobs):
    args = [(ds, tr, te, cfg, k) for k, (tr, te) in enumerate(plan.splits())]
    if jobs <= 1:
        return [worker(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(worker, *a) for a in args]
        return [f.result() for f in futures]  # fold order, whatever finishes first


def run_study(cfg: ExperimentConfig, jobs: int = 1, dataset: data.Dataset | None = None) -> list[Report]:
    ds = cfg.dataset.load(cfg.seed) if dataset is None else dataset
    plan = data.stratified_kfold(ds.y, cfg.n_folds, cfg.seed)
    if cfg.study == "quality":
        worker, cls = quality_fold, MetricReport
    else:
        worker, cls = qnn_fold, PerfReport
    results = _run_folds(worker, ds, plan, cfg, jobs)
    return [_collect(cls, ds.name, enc, results) for enc in cfg.encoders]


def run_quality_study(cfg: ExperimentConfig, jobs: int = 1, dataset: data.Dataset | None = None) -> list[MetricReport]:
    if cfg.study != "quality":
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "study": "quality"})
    return run_study(cfg, jobs, dataset)


def run_qnn_study(cfg: ExperimentConfig, jobs: int = 1, dataset: data.Dataset | None = None) -> list[PerfReport]:
    if cfg.study != "qnn":
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "study": "qnn"})
    return run_study(cfg, jobs, dataset)


# -- serialisation -------------------------------------------------------------

def reports_to_json(reports: list[Report], cfg: ExperimentConfig, manifest: dict | None = None) -> str:
    doc = {
        "manifest": manifest or {"config": cfg.to_dict()},
        "provenance": provenance(cfg),
        "study": cfg.study,
        "reports": [r.to_dict() for r in reports],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def reports_to_csv(reports: list[Report], cfg: ExperimentConfig, manifest: dict | None = None) -> str:
    """One row per (dataset, encoder); ``<metric>_mean`` / ``<metric>_std`` columns in report column order.

    The manifest and provenance block are carried as ``#`` comment lines on top.
    """
    buf = io.StringIO()
    for key, block in (("manifest", manifest or {"config": cfg.to_dict()}), ("provenance", provenance(cfg))):
        buf.write(f"# {key}: {json.dumps(block, sort_keys=True)}\n")
    cols = reports[0].columns if reports else ()
    header = ["dataset", "encoder", "n_qubits", "folds"]
    for c in cols:
        header += [f"{c}_mean", f"{c}_std"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in reports:
        agg = r.aggregate()
        row = [r.dataset, r.encoder, r.n_qubits, r.n_folds]
        for c in cols:
            row += [f"{agg[c]['mean']:.10g}", f"{agg[c]['std']:.10g}"]
        w.writerow(row)
    return buf.getvalue()


def read_report_csv(text: str) -> list[dict]:
    """Parse a report CSV back into row dicts, skipping the comment block."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
