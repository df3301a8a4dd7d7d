"""Cross-validation and sweep driver.

A run is described by a flat config dict (see :class:`QnnConfig` and
:class:`MlpConfig`). Every fold's training seed is derived by hashing the
config together with the fold id, so a cell's result depends only on its
own configuration and never on the order in which cells are executed.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .circuits import AngleMap, AnsatzSpec, EncoderLayout, EncoderSpec, EntanglerKind
from .data import Dataset, FoldPlan, kfold_split
from .errors import ConfigError, InvalidArgumentError, OxqnnError
from .features import TARGET_SCALE, feature_matrix, fit_scaler, scale_target
from .mlp import MlpArchitecture, TrainingConfig, train_mlp
from .powell import OptimizerSettings
from .qnn import Decoder, QnnModel, predict_batch, train
from .state import GateKind

log = logging.getLogger(__name__)


def derive_seed(*parts) -> int:
    """Stable 32-bit seed from JSON-serializable parts (not Python's salted ``hash``)."""
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"), default=str)
    return int.from_bytes(hashlib.sha256(blob.encode()).digest()[:4], "big")


@dataclass(frozen=True)
class QnnConfig:
    layout: str = "5x"
    angle_map: str = "arctan"
    depth: int = 1
    entangler: str = "linear"
    gate: str = "CX"
    relative_tolerance: float = 1e-6
    max_iterations: int = 1000
    line_search_tolerance: float = 1e-6
    restarts: int = 1
    seed: int = 0
    k: int = 5
    fold_seed: int = 0
    model: str = "qnn"

    def __post_init__(self):
        EncoderLayout(self.layout), AngleMap(self.angle_map), EntanglerKind(self.entangler), GateKind(self.gate)
        self.ansatz  # validates width/entangler combination

    @property
    def width(self) -> int:
        return EncoderLayout(self.layout).n_qubits

    @property
    def ansatz(self) -> AnsatzSpec:
        return AnsatzSpec(self.width, self.depth, self.entangler, self.gate)

    @property
    def n_parameters(self) -> int:
        return self.ansatz.parameter_count

    @property
    def label(self) -> str:
        return f"qnn-{self.layout}-{self.angle_map}-{self.entangler}-{self.gate}-d{self.depth}"

    def optimizer(self, seed: int) -> OptimizerSettings:
        return OptimizerSettings(self.relative_tolerance, self.max_iterations, self.line_search_tolerance, seed)

    def blank_model(self) -> QnnModel:
        decoder = Decoder.Z4 if self.width == 5 else Decoder.Z4_PLUS_Z9
        return QnnModel(EncoderSpec(self.layout, self.angle_map), self.ansatz, decoder)


@dataclass(frozen=True)
class MlpConfig:
    arch: str = "5-5-1"
    learning_rate: float = 0.02
    epochs: int = 10000
    l2_weight: float = 1e-4
    seed: int = 0
    k: int = 5
    fold_seed: int = 0
    model: str = "mlp"

    def __post_init__(self):
        if MlpArchitecture.parse(self.arch).layer_sizes[0] != 5:
            raise InvalidArgumentError("MLP input layer must have 5 neurons")

    @property
    def architecture(self) -> MlpArchitecture:
        return MlpArchitecture.parse(self.arch)

    @property
    def n_parameters(self) -> int:
        return self.architecture.parameter_count

    @property
    def label(self) -> str:
        return f"mlp-{self.arch}-l2={self.l2_weight!r}"


@dataclass(frozen=True)
class MeanConfig:
    """Reference model that predicts the training-fold mean for every record."""

    seed: int = 0
    k: int = 5
    fold_seed: int = 0
    model: str = "mean"

    n_parameters = 1
    label = "mean"


ModelConfig = QnnConfig | MlpConfig | MeanConfig
_CONFIG_KINDS = {"qnn": QnnConfig, "mlp": MlpConfig, "mean": MeanConfig}


def config_to_dict(config: ModelConfig) -> dict:
    return asdict(config)


def config_from_dict(d: dict) -> ModelConfig:
    d = dict(d)
    kind = d.get("model", "qnn")
    cls = _CONFIG_KINDS.get(kind)
    if cls is None:
        raise ConfigError(f"unknown model kind {kind!r}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown {kind} config key(s): {', '.join(unknown)}")
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} config: {exc}") from exc


@dataclass
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    seed: int
    train_rmse: float  # scaled units
    test_rmse: float
    final_cost: float
    iterations: int
    trace_monotone: bool

    @property
    def train_rmse_c(self) -> float:
        return self.train_rmse * TARGET_SCALE

    @property
    def test_rmse_c(self) -> float:
        return self.test_rmse * TARGET_SCALE


@dataclass
class CvResult:
    config: dict
    n_parameters: int
    folds: list[FoldResult] = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def mean_train_rmse(self) -> float:
        return float(np.mean([f.train_rmse for f in self.folds])) if self.folds else math.nan

    @property
    def mean_test_rmse(self) -> float:
        return float(np.mean([f.test_rmse for f in self.folds])) if self.folds else math.nan

    @property
    def mean_train_rmse_c(self) -> float:
        return self.mean_train_rmse * TARGET_SCALE

    @property
    def mean_test_rmse_c(self) -> float:
        return self.mean_test_rmse * TARGET_SCALE


def _rmse(pred: np.ndarray, target: np.ndarray) -> float:
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def _run_fold(dataset: Dataset, config: ModelConfig, plan: FoldPlan, fold: int) -> FoldResult:
    train_idx, test_idx = plan.train_indices(fold), plan.test_indices(fold)
    train_recs, test_recs = dataset.subset(train_idx), dataset.subset(test_idx)
    seed = derive_seed(config_to_dict(config), fold)
    y_train = scale_target(np.array([r.melting_point for r in train_recs]))
    y_test = scale_target(np.array([r.melting_point for r in test_recs]))
    scaler = fit_scaler(train_recs)

    if isinstance(config, QnnConfig):
        model = replace(config.blank_model(), scaler=scaler)
        result = train(model, train_recs, config.optimizer(seed), restarts=config.restarts)
        trained = result.model
        p_train = predict_batch(trained, feature_matrix(train_recs))
        p_test = predict_batch(trained, feature_matrix(test_recs))
        trace = result.trace
        iterations = len(trace) - 1
        final = result.final_cost
        monotone = bool(np.all(np.diff(trace) <= 0))
    elif isinstance(config, MlpConfig):
        x_train = scaler.transform(feature_matrix(train_recs))
        x_test = scaler.transform(feature_matrix(test_recs))
        tc = TrainingConfig(config.learning_rate, config.epochs, config.l2_weight, seed)
        fitted = train_mlp(config.architecture, x_train, y_train, tc)
        p_train, p_test = fitted.predict(x_train), fitted.predict(x_test)
        iterations = len(fitted.loss_trace)
        final = fitted.loss_trace[-1]
        monotone = True  # Adam makes no monotonicity promise
    else:
        mean = float(np.mean(y_train))
        p_train, p_test = np.full(y_train.size, mean), np.full(y_test.size, mean)
        iterations, final, monotone = 0, _rmse(p_train, y_train) ** 2, True
    return FoldResult(fold, len(train_recs), len(test_recs), seed, _rmse(p_train, y_train),
                      _rmse(p_test, y_test), float(final), iterations, monotone)


def _run_fold_star(args):
    return _run_fold(*args)


def run_cross_validation(dataset: Dataset, config: ModelConfig, jobs: int = 1) -> CvResult:
    """k-fold CV: scaler and model are fit on the training folds only."""
    plan = kfold_split(dataset, config.k, config.fold_seed)
    tasks = [(dataset, config, plan, fold) for fold in range(config.k)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            folds = list(pool.map(_run_fold_star, tasks))
    else:
        folds = [_run_fold(*t) for t in tasks]
    return CvResult(config_to_dict(config), config.n_parameters, folds)


def expand_grid(grid: dict) -> list[ModelConfig]:
    """Cartesian product of a grid dict; list-valued keys are swept, scalars are fixed.

    QNN grids sweep any of ``layout, angle_map, entangler, gate, depth`` (plus
    scalar optimizer settings); MLP grids sweep ``arch`` and ``l2_weight``.
    """
    grid = dict(grid)
    kind = grid.get("model", "qnn")
    axes = {k: (v if isinstance(v, list) else [v]) for k, v in grid.items()}
    keys = list(axes)
    cells: list[ModelConfig] = []

    def rec(i: int, acc: dict):
        if i == len(keys):
            cells.append(config_from_dict({**acc, "model": kind}))
            return
        for value in axes[keys[i]]:
            rec(i + 1, {**acc, keys[i]: value})

    rec(0, {})
    if not cells:
        raise InvalidArgumentError("empty sweep grid")
    return cells


def iter_sweep(dataset: Dataset, cells: Sequence[ModelConfig], jobs: int = 1) -> Iterator[CvResult]:
    """Yield one CvResult per cell in grid order; a failing cell is marked, not fatal."""
    for config in cells:
        try:
            yield run_cross_validation(dataset, config, jobs=jobs)
        except OxqnnError as exc:
            log.warning("cell %s failed: %s", config.label, exc)
            yield CvResult(config_to_dict(config), config.n_parameters, [], error=str(exc))


def run_sweep(dataset: Dataset, grid: dict | Iterable[ModelConfig], jobs: int = 1) -> list[CvResult]:
    cells = expand_grid(grid) if isinstance(grid, dict) else list(grid)
    if not cells:
        raise InvalidArgumentError("empty sweep grid")
    return list(iter_sweep(dataset, cells, jobs=jobs))
