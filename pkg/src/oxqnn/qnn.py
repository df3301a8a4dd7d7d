"""QNN regression: encoder -> ansatz -> Z-expectation decoder, trained with Powell.

Every gate used here (Ry, CX, CZ) is real, and the register starts in
|0...0>, so the forward pass runs on real float64 amplitudes for a whole
batch of records at once. The encoder's Ry(theta) and the first ansatz
block's Ry(phi) on the same wire are merged into a single Ry(theta + phi).
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuits import (AnsatzSpec, Circuit, EncoderSpec, bind_parameters, build_ansatz,
                       build_encoder, entangler_pairs)
from .errors import InvalidArgumentError
from .features import (FeatureRecord, Scaler, compile_angles, feature_matrix, scale_target)
from .powell import OptimizerSettings, PowellResult, powell_minimize
from .state import GateKind, _bit_table, _expectation_z_array, apply_gates, expectation_z, zero_state


class Decoder(str, enum.Enum):
    Z4 = "z4"
    Z4_PLUS_Z9 = "z4+z9"

    @property
    def qubits(self) -> tuple[int, ...]:
        return (4,) if self is Decoder.Z4 else (4, 9)

    @property
    def width(self) -> int:
        return 5 if self is Decoder.Z4 else 10


_FUSED_MAX_WIDTH = 6


@lru_cache(maxsize=256)
def _compiled_entangler(pairs: tuple[tuple[int, int], ...], gate: GateKind, width: int):
    """Gather index and sign vector so that ``out = amps[..., index] * sign``."""
    # forward image of every input basis index and its accumulated sign
    image = np.arange(2 ** width)
    sign = np.ones(2 ** width)
    for c, t in pairs:
        cbit = (image >> (width - 1 - c)) & 1
        if gate is GateKind.CX:
            image = image ^ (cbit << (width - 1 - t))
        else:
            tbit = (image >> (width - 1 - t)) & 1
            sign = sign * (1 - 2 * (cbit & tbit))
    gather = np.empty_like(image)
    gather[image] = np.arange(2 ** width)
    return gather, sign[gather]


def _ry_factors(angles: np.ndarray) -> np.ndarray:
    """Stack of 2x2 Ry matrices, shape ``angles.shape + (2, 2)``."""
    c, s = np.cos(angles / 2), np.sin(angles / 2)
    return np.stack([c, -s, s, c], axis=-1).reshape(angles.shape + (2, 2))


def _kron_all(mats: np.ndarray) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, None, :, None] * m[None, :, None, :]).reshape(out.shape[0] * 2, -1)
    return out


def _apply_ry_layer(psi: np.ndarray, width: int, mats: np.ndarray) -> np.ndarray:
    """One Ry per wire, applied as ``K_high @ X @ K_low.T`` on the reshaped batch."""
    half = width // 2
    x = psi.reshape(psi.shape[0], 2 ** half, 2 ** (width - half))
    return (_kron_all(mats[:half]) @ x @ _kron_all(mats[half:]).T).reshape(psi.shape)


def product_state(angles: np.ndarray) -> np.ndarray:
    """Real amplitudes of ``Ry(angles[:, 0]) (x) ... |0...0>`` for a batch, shape ``(n, 2**w)``."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    c, s = np.cos(angles / 2), np.sin(angles / 2)
    psi = np.ones((angles.shape[0], 1))
    for q in range(angles.shape[1]):
        psi = np.stack([psi * c[:, q:q + 1], psi * s[:, q:q + 1]], axis=-1).reshape(angles.shape[0], -1)
    return psi


@lru_cache(maxsize=64)
def _fused_tables(pairs: tuple[tuple[int, int], ...], gate: GateKind, width: int):
    """Tables that fold each Ry layer and its entangler into one matrix.

    ``state_index[q, j]`` picks cos or sin of wire ``q`` for output amplitude
    ``j`` of ``entangler(Ry-layer |0>)``. A later layer maps ``psi_in @ M``
    with ``M[i, j] = sign[j] * K[gather[j], i]``, ``K`` the Kronecker product
    of the layer's Ry matrices.
    """
    gather, sign = _compiled_entangler(pairs, gate, width)
    bits = _bit_table(width).astype(np.intp)
    state_index = 2 * np.arange(width)[:, None] + bits[:, gather]
    return state_index, gather, sign


def _kron_layers(mats: np.ndarray) -> np.ndarray:
    """Batched Kronecker product over axis 1 of ``(b, w, 2, 2)``."""
    out = mats[:, 0]
    for q in range(1, mats.shape[1]):
        b, n = out.shape[0], out.shape[1]
        out = (out[:, :, None, :, None] * mats[:, q, None, :, None, :]).reshape(b, 2 * n, 2 * n)
    return out


def _fused_states(angles: np.ndarray, blocks: np.ndarray, tables) -> np.ndarray:
    state_index, gather, sign = tables
    first = angles + blocks[0]
    cs = np.stack([np.cos(first / 2), np.sin(first / 2)], axis=-1).reshape(first.shape[0], -1)
    psi = np.ascontiguousarray(cs[:, state_index].prod(axis=1) * sign)
    if len(blocks) > 1:
        kron = _kron_layers(_ry_factors(blocks[1:]))
        # matmul only reaches BLAS on contiguous operands
        layers = np.ascontiguousarray(kron[:, gather, :].transpose(0, 2, 1) * sign)
        for m in layers:
            psi = psi @ m
    return psi


@dataclass(frozen=True)
class CircuitRegressor:
    """Ansatz plus decoder wires, independent of any feature pipeline."""

    ansatz: AnsatzSpec
    decoder_qubits: tuple[int, ...]

    def __post_init__(self):
        for q in self.decoder_qubits:
            if not 0 <= q < self.ansatz.width:
                raise InvalidArgumentError(f"decoder qubit {q} outside a width-{self.ansatz.width} register")

    @property
    def n_parameters(self) -> int:
        return self.ansatz.parameter_count

    def states(self, encoder_angles: np.ndarray, params: Sequence[float]) -> np.ndarray:
        spec = self.ansatz
        angles = np.atleast_2d(np.asarray(encoder_angles, dtype=float))
        params = np.asarray(params, dtype=float)
        if angles.shape[1] != spec.width:
            raise InvalidArgumentError(f"expected {spec.width} encoder angles per record, got {angles.shape[1]}")
        if params.shape != (spec.parameter_count,):
            raise InvalidArgumentError(f"expected {spec.parameter_count} parameters, got {params.size}")
        if spec.depth == 0:
            return product_state(angles)
        blocks = params.reshape(spec.depth, spec.width)
        pairs = tuple(entangler_pairs(spec.entangler, spec.width))
        if spec.width <= _FUSED_MAX_WIDTH:
            return _fused_states(angles, blocks, _fused_tables(pairs, spec.two_qubit_gate, spec.width))
        gather, sign = _compiled_entangler(pairs, spec.two_qubit_gate, spec.width)
        psi = product_state(angles + blocks[0])[:, gather] * sign
        for layer in _ry_factors(blocks[1:]):
            psi = _apply_ry_layer(psi, spec.width, layer)[:, gather] * sign
        return psi

    def predict_angles(self, encoder_angles: np.ndarray, params: Sequence[float]) -> np.ndarray:
        psi = self.states(encoder_angles, params)
        out = np.zeros(psi.shape[0])
        for q in self.decoder_qubits:
            out += _expectation_z_array(psi, self.ansatz.width, q)
        return out

    def cost(self, encoder_angles: np.ndarray, targets: np.ndarray, params: Sequence[float]) -> float:
        residual = self.predict_angles(encoder_angles, params) - targets
        return float(np.dot(residual, residual) / residual.size)

    def fit(self, encoder_angles: np.ndarray, targets: np.ndarray, x0: Sequence[float],
            settings: OptimizerSettings | None = None) -> PowellResult:
        angles = np.atleast_2d(np.asarray(encoder_angles, dtype=float))
        targets = np.asarray(targets, dtype=float)
        if targets.size == 0:
            raise InvalidArgumentError("training set is empty")
        return powell_minimize(lambda p: self.cost(angles, targets, p), x0, settings)


def init_params(n_params: int, seed: int) -> np.ndarray:
    """Uniform draws from [0, 2*pi)."""
    return np.random.default_rng(seed).uniform(0.0, 2 * np.pi, size=n_params)


@dataclass(frozen=True)
class QnnModel:
    encoder: EncoderSpec
    ansatz: AnsatzSpec
    decoder: Decoder
    params: tuple[float, ...] = ()
    scaler: Scaler | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "decoder", Decoder(self.decoder))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.ansatz.width != self.decoder.width:
            raise InvalidArgumentError(
                f"decoder {self.decoder.value} needs width {self.decoder.width}, ansatz has {self.ansatz.width}")
        if self.encoder.n_qubits != self.ansatz.width:
            raise InvalidArgumentError(
                f"encoder {self.encoder.layout.value} drives {self.encoder.n_qubits} qubits, ansatz has {self.ansatz.width}")
        if self.params and len(self.params) != self.ansatz.parameter_count:
            raise InvalidArgumentError(
                f"ansatz has {self.ansatz.parameter_count} parameters, got {len(self.params)}")

    @property
    def regressor(self) -> CircuitRegressor:
        return CircuitRegressor(self.ansatz, self.decoder.qubits)

    @property
    def output_range(self) -> tuple[float, float]:
        k = len(self.decoder.qubits)
        return -float(k), float(k)

    def encoder_angles(self, raw_features) -> np.ndarray:
        if self.scaler is None:
            raise InvalidArgumentError("model has no fitted scaler")
        x = np.atleast_2d(np.asarray(raw_features, dtype=float))
        return compile_angles(self.encoder.layout, self.encoder.angle_map, self.scaler.transform(x))

    def to_dict(self) -> dict:
        return {
            "encoder": {"layout": self.encoder.layout.value, "angle_map": self.encoder.angle_map.value},
            "ansatz": {"width": self.ansatz.width, "depth": self.ansatz.depth,
                       "entangler": self.ansatz.entangler.value, "gate": self.ansatz.two_qubit_gate.value},
            "decoder": self.decoder.value,
            "params": list(self.params),
            "scaler": None if self.scaler is None else self.scaler.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QnnModel":
        a = d["ansatz"]
        return cls(
            encoder=EncoderSpec(d["encoder"]["layout"], d["encoder"]["angle_map"]),
            ansatz=AnsatzSpec(a["width"], a["depth"], a["entangler"], a["gate"]),
            decoder=Decoder(d["decoder"]),
            params=tuple(d["params"]),
            scaler=None if d.get("scaler") is None else Scaler.from_dict(d["scaler"]),
            seed=int(d.get("seed", 0)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "QnnModel":
        return cls.from_dict(json.loads(text))


def _require_params(model: QnnModel) -> None:
    if len(model.params) != model.ansatz.parameter_count:
        raise InvalidArgumentError("model parameters are not bound")


def predict_batch(model: QnnModel, raw_features) -> np.ndarray:
    """Scaled melting-point predictions for an ``(n, 5)`` feature array."""
    _require_params(model)
    return model.regressor.predict_angles(model.encoder_angles(raw_features), model.params)


def predict(model: QnnModel, raw_features: Sequence[float]) -> float:
    return float(predict_batch(model, [raw_features])[0])


def predict_via_circuit(model: QnnModel, raw_features: Sequence[float]) -> float:
    """Reference path through the generic state engine (slow, used to cross-check)."""
    _require_params(model)
    angles = model.encoder_angles([raw_features])[0]
    circuit: Circuit = build_encoder(model.encoder, angles) + bind_parameters(build_ansatz(model.ansatz), model.params)
    state = apply_gates(zero_state(circuit.n_qubits), circuit.gates)
    return sum(expectation_z(state, q) for q in model.decoder.qubits)


def _training_arrays(model: QnnModel, records: Sequence[FeatureRecord]):
    if len(records) == 0:
        raise InvalidArgumentError("training set is empty")
    angles = model.encoder_angles(feature_matrix(records))
    targets = scale_target(np.array([r.melting_point for r in records]))
    return angles, targets


def mse_cost(model: QnnModel, params: Sequence[float], records: Sequence[FeatureRecord]) -> float:
    angles, targets = _training_arrays(model, records)
    return model.regressor.cost(angles, targets, params)


@dataclass
class TrainResult:
    model: QnnModel
    initial_cost: float
    final_cost: float
    trace: list[float] = field(default_factory=list)
    n_evaluations: int = 0
    converged: bool = False


def train(model: QnnModel, records: Sequence[FeatureRecord], settings: OptimizerSettings | None = None,
          initial_params: Sequence[float] | None = None, restarts: int = 1) -> TrainResult:
    """Fit the ansatz parameters by minimizing the MSE with Powell.

    Initial parameters come from ``init_params(settings.seed)`` unless given.
    With ``restarts > 1`` the extra starts use seeds ``seed + r`` and the
    lowest final cost wins.
    """
    settings = settings or OptimizerSettings()
    angles, targets = _training_arrays(model, records)
    reg = model.regressor
    best: PowellResult | None = None
    for r in range(max(1, restarts)):
        if initial_params is not None and r == 0:
            x0 = np.asarray(initial_params, dtype=float)
        else:
            x0 = init_params(reg.n_parameters, settings.seed + r)
        result = reg.fit(angles, targets, x0, settings)
        if best is None or result.fun < best.fun:
            best = result
    trained = replace(model, params=tuple(best.x.tolist()), seed=settings.seed)
    return TrainResult(trained, best.trace[0], best.fun, best.trace, best.n_evaluations, best.converged)
