"""Feature/target scaling and feature-to-angle compilation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import AngleMap, EncoderLayout
from .errors import DegenerateFeatureError, InvalidArgumentError

FEATURE_NAMES = (
    "formation_energy_per_atom",
    "band_gap",
    "density",
    "cati_anio_ratio",
    "dist_from_o",
)
N_FEATURES = len(FEATURE_NAMES)

# Melting points are divided by this so the largest one (3390 C) lands just below 1.
TARGET_SCALE = 3500.0


@dataclass(frozen=True)
class FeatureRecord:
    material_id: str
    features: tuple[float, ...]
    melting_point: float

    def __post_init__(self):
        feats = tuple(float(v) for v in self.features)
        if len(feats) != N_FEATURES:
            raise InvalidArgumentError(f"{self.material_id}: expected {N_FEATURES} features, got {len(feats)}")
        if not all(np.isfinite(feats)):
            raise InvalidArgumentError(f"{self.material_id}: non-finite feature value")
        if not np.isfinite(self.melting_point):
            raise InvalidArgumentError(f"{self.material_id}: non-finite melting point")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "melting_point", float(self.melting_point))


@dataclass(frozen=True)
class Scaler:
    """Standardize with training statistics, then divide by the largest |z|."""

    mean: tuple[float, ...]
    std: tuple[float, ...]
    max_abs: tuple[float, ...]

    def transform(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        return (x - np.asarray(self.mean)) / np.asarray(self.std) / np.asarray(self.max_abs)

    def inverse_transform(self, scaled) -> np.ndarray:
        x = np.asarray(scaled, dtype=float)
        return x * np.asarray(self.max_abs) * np.asarray(self.std) + np.asarray(self.mean)

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "std": list(self.std), "max_abs": list(self.max_abs)}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(tuple(d["mean"]), tuple(d["std"]), tuple(d["max_abs"]))


def feature_matrix(records: Sequence[FeatureRecord]) -> np.ndarray:
    return np.array([r.features for r in records], dtype=float).reshape(len(records), N_FEATURES)


def fit_scaler(records) -> Scaler:
    """Fit on records (or an ``(n, 5)`` array). Uses the population std (ddof=0)."""
    x = records if isinstance(records, np.ndarray) else feature_matrix(records)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InvalidArgumentError("fit_scaler needs at least 2 records")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    bad = [FEATURE_NAMES[i] if x.shape[1] == N_FEATURES else str(i) for i in np.flatnonzero(std <= 0)]
    if bad:
        raise DegenerateFeatureError(f"constant feature(s): {', '.join(bad)}")
    z = (x - mean) / std
    max_abs = np.abs(z).max(axis=0)
    return Scaler(tuple(mean.tolist()), tuple(std.tolist()), tuple(max_abs.tolist()))


def apply_scaler(scaler: Scaler, features) -> np.ndarray:
    """No clipping: test points may land outside [-1, 1]."""
    return scaler.transform(features)


def angle(angle_map: AngleMap | str, x):
    angle_map = AngleMap(angle_map)
    x = np.asarray(x, dtype=float)
    if angle_map is AngleMap.PI_X:
        out = np.pi * x
    else:
        out = np.arctan(x) + np.pi / 2
    return float(out) if out.ndim == 0 else out


def scale_target(t_celsius):
    return np.asarray(t_celsius, dtype=float) / TARGET_SCALE if np.ndim(t_celsius) else float(t_celsius) / TARGET_SCALE


def unscale_target(y):
    return np.asarray(y, dtype=float) * TARGET_SCALE if np.ndim(y) else float(y) * TARGET_SCALE


def compile_angles(layout: EncoderLayout | str, angle_map: AngleMap | str, scaled_features) -> np.ndarray:
    """Rotation angles for one record (shape ``(5,)``) or a batch (shape ``(n, 5)``).

    The 10-qubit layouts interleave: feature i drives qubits 2i and 2i+1.
    """
    layout = EncoderLayout(layout)
    x = np.asarray(scaled_features, dtype=float)
    if x.shape[-1] != N_FEATURES:
        raise InvalidArgumentError(f"expected {N_FEATURES} scaled features, got {x.shape[-1]}")
    first = angle(angle_map, x)
    if layout is EncoderLayout.FIVE_X:
        return np.asarray(first)
    second = first if layout is EncoderLayout.TEN_XX else angle(angle_map, x * x)
    out = np.empty(x.shape[:-1] + (2 * N_FEATURES,))
    out[..., 0::2] = first
    out[..., 1::2] = second
    return out
