"""Dataset file I/O, the synthetic oxide generator, and k-fold plans."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, InvalidArgumentError
from .features import FEATURE_NAMES, FeatureRecord

ID_COLUMN = "material_id"
TARGET_COLUMN = "melting_point_c"
COLUMNS = (ID_COLUMN,) + FEATURE_NAMES + (TARGET_COLUMN,)

# Uniform sampling ranges of the synthetic generator, in the file's units.
SYNTHETIC_RANGES = {
    "formation_energy_per_atom": (-4.0, -1.0),  # eV/atom
    "band_gap": (0.0, 7.0),                     # eV
    "density": (2.5, 11.0),                     # g/cm^3
    "cati_anio_ratio": (0.33, 1.0),
    "dist_from_o": (1.7, 2.6),                  # Angstrom
}
SYNTHETIC_T_RANGE = (500.0, 3400.0)


@dataclass(frozen=True)
class Dataset:
    records: tuple[FeatureRecord, ...]
    provenance: str = "file"

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for r in self.records:
            if r.material_id in seen:
                raise DataError(f"duplicate material_id {r.material_id!r}")
            seen.add(r.material_id)

    def __len__(self) -> int:
        return len(self.records)

    def subset(self, indices) -> list[FeatureRecord]:
        return [self.records[i] for i in indices]

    @property
    def targets(self) -> np.ndarray:
        return np.array([r.melting_point for r in self.records])


def load_dataset(path) -> Dataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return parse_dataset(text, source=str(path))


def parse_dataset(text: str, source: str = "<string>") -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{source}: empty file") from None
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise DataError(f"{source}: missing column(s): {', '.join(missing)}")
    col = {name: header.index(name) for name in COLUMNS}
    records = []
    ids = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{source}: row {lineno} has {len(row)} cells, expected {len(header)}")
        material_id = row[col[ID_COLUMN]].strip()
        if material_id in ids:
            raise DataError(f"{source}: row {lineno}: duplicate material_id {material_id!r}")
        ids.add(material_id)
        values = []
        for name in FEATURE_NAMES + (TARGET_COLUMN,):
            cell = row[col[name]].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"{source}: row {lineno}, column {name}: non-numeric value {cell!r}") from None
            if not np.isfinite(value):
                raise DataError(f"{source}: row {lineno}, column {name}: non-finite value {cell!r}")
            values.append(value)
        records.append(FeatureRecord(material_id, tuple(values[:-1]), values[-1]))
    return Dataset(tuple(records), provenance=f"file:{source}")


def format_dataset(dataset: Dataset) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in dataset.records:
        writer.writerow([r.material_id, *map(repr, r.features), repr(r.melting_point)])
    return out.getvalue()


def write_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(format_dataset(dataset), encoding="utf-8")


def synthetic_melting_point(features) -> np.ndarray:
    """Noise-free melting point (C) of the synthetic generator.

    Each feature is mapped linearly onto [-1, 1] over its sampling range
    (``u_*`` below), then::

        s = 0.55*(-u_ef) + 0.35*u_gap + 0.20*u_rho - 0.25*u_dist
            + 0.30*(-u_ef)*u_gap - 0.15*u_ratio**2
        T = 1950 + 1450*tanh(s)

    so T stays inside (500, 3400) before noise.
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    lo = np.array([SYNTHETIC_RANGES[n][0] for n in FEATURE_NAMES])
    hi = np.array([SYNTHETIC_RANGES[n][1] for n in FEATURE_NAMES])
    u = 2.0 * (x - lo) / (hi - lo) - 1.0
    u_ef, u_gap, u_rho, u_ratio, u_dist = u.T
    s = (0.55 * -u_ef + 0.35 * u_gap + 0.20 * u_rho - 0.25 * u_dist
         + 0.30 * -u_ef * u_gap - 0.15 * u_ratio ** 2)
    return 1950.0 + 1450.0 * np.tanh(s)


def generate_synthetic_dataset(n: int = 70, noise_std: float = 100.0, seed: int = 0) -> Dataset:
    """Synthetic stand-in for the oxide table; targets clipped to [500, 3400] C."""
    if n < 10:
        raise InvalidArgumentError("synthetic dataset needs n >= 10")
    if noise_std < 0:
        raise InvalidArgumentError("noise_std must be >= 0")
    rng = np.random.default_rng(seed)
    lo = np.array([SYNTHETIC_RANGES[f][0] for f in FEATURE_NAMES])
    hi = np.array([SYNTHETIC_RANGES[f][1] for f in FEATURE_NAMES])
    x = rng.uniform(lo, hi, size=(n, len(FEATURE_NAMES)))
    t = synthetic_melting_point(x)
    if noise_std > 0:
        t = np.clip(t + rng.normal(0.0, noise_std, size=n), *SYNTHETIC_T_RANGE)
    records = tuple(
        FeatureRecord(f"syn-{i:04d}", tuple(x[i].tolist()), float(t[i])) for i in range(n)
    )
    return Dataset(records, provenance=f"synthetic(n={n},noise={noise_std!r},seed={seed})")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: tuple[int, ...]  # record index -> fold id
    seed: int

    def test_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f == fold]

    def train_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f != fold]

    @property
    def fold_sizes(self) -> list[int]:
        return [self.assignment.count(f) for f in range(self.k)]


def kfold_split(dataset_or_n, k: int = 5, seed: int = 0) -> FoldPlan:
    """Seeded shuffle, then deal records round-robin into ``k`` folds."""
    n = dataset_or_n if isinstance(dataset_or_n, int) else len(dataset_or_n)
    if k < 2:
        raise InvalidArgumentError("k must be >= 2")
    if k > n:
        raise InvalidArgumentError(f"k={k} exceeds the number of records ({n})")
    order = np.random.default_rng(seed).permutation(n)
    assignment = [0] * n
    for pos, idx in enumerate(order):
        assignment[idx] = pos % k
    return FoldPlan(k, tuple(assignment), seed)
