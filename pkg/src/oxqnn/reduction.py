"""Search for short circuits equivalent to an entangler block.

Two reductions are checked:

* ``reversed-linear``: CX(w-2, w-1), CX(w-3, w-2), ..., CX(0, 1).
* ``bottom-star``: every CX touches the bottom wire (qubit ``w-1``), at most
  one CX per other wire, optionally followed by a relabeling of the output
  wires (a qubit permutation, which costs no gates when tracked in software).

Because gate order inside a drawn entangler is a convention, each check
is repeated over a few alternative orderings of the same gate multiset and
the orderings that satisfy it are reported.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuits import Circuit, EntanglerKind, entangler_circuit, entangler_pairs, unitary_equivalent
from .errors import InvalidArgumentError, ResourceLimitError
from .state import Gate, GateKind, circuit_unitary

MAX_STAR_WIDTH = 7


def _reach(kind: EntanglerKind) -> int:
    return {EntanglerKind.CIRCULAR2: 2, EntanglerKind.CIRCULAR4: 4}.get(kind, 1)


def entangler_orderings(kind: EntanglerKind | str, width: int) -> dict[str, list[tuple[int, int]]]:
    """Alternative gate orders of one entangler block, canonical first."""
    kind = EntanglerKind(kind)
    canonical = entangler_pairs(kind, width)
    out = {"canonical": canonical, "reversed": canonical[::-1]}
    if kind in (EntanglerKind.CIRCULAR, EntanglerKind.CIRCULAR2, EntanglerKind.CIRCULAR4):
        ks = range(1, _reach(kind) + 1)
        qubits = range(width)
        out["descending-k"] = [(i, (i + k) % width) for k in reversed(ks) for i in qubits]
        out["reversed-ring"] = [(i, (i + k) % width) for k in ks for i in reversed(qubits)]
        out["qubit-major"] = [(i, (i + k) % width) for i in qubits for k in ks]
        out["qubit-major-descending"] = [(i, (i + k) % width) for i in reversed(qubits) for k in ks]
    if kind is EntanglerKind.FULL:
        out["column-major"] = [(i, j) for j in range(width) for i in range(j)]
    # drop exact duplicates while keeping the first name
    seen, unique = set(), {}
    for name, pairs in out.items():
        key = tuple(pairs)
        if key not in seen:
            seen.add(key)
            unique[name] = pairs
    return unique


def reversed_linear_pairs(width: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(width - 2, -1, -1)]


def _basis_image(pairs, width: int) -> np.ndarray:
    """Image of every basis index under a CX-only circuit."""
    image = np.arange(2 ** width)
    for c, t in pairs:
        image = image ^ (((image >> (width - 1 - c)) & 1) << (width - 1 - t))
    return image


def _wire_permutation_of(mapping: np.ndarray, width: int) -> tuple[int, ...] | None:
    """If ``mapping`` relabels wires, return ``perm`` with output wire ``perm[q]`` = input wire ``q``."""
    perm = []
    for q in range(width):
        img = int(mapping[1 << (width - 1 - q)])
        if img == 0 or img & (img - 1):
            return None
        perm.append(width - 1 - img.bit_length() + 1)
    if sorted(perm) != list(range(width)):
        return None
    idx = np.arange(2 ** width)
    expect = np.zeros_like(idx)
    for q, p in enumerate(perm):
        expect |= ((idx >> (width - 1 - q)) & 1) << (width - 1 - p)
    return tuple(perm) if np.array_equal(expect, mapping) else None


def wire_permutation_unitary(perm: tuple[int, ...], width: int) -> np.ndarray:
    """Unitary sending input wire ``q`` to output wire ``perm[q]``."""
    idx = np.arange(2 ** width)
    out = np.zeros_like(idx)
    for q, p in enumerate(perm):
        out |= ((idx >> (width - 1 - q)) & 1) << (width - 1 - p)
    u = np.zeros((2 ** width, 2 ** width))
    u[out, idx] = 1.0
    return u


def _star_candidates(width: int):
    bottom = width - 1
    others = list(range(bottom))
    seen = set()
    for roles in itertools.product((None, "to", "from"), repeat=len(others)):
        active = [(q, r) for q, r in zip(others, roles) if r is not None]
        for order in itertools.permutations(active):
            pairs = tuple((q, bottom) if r == "to" else (bottom, q) for q, r in order)
            if pairs in seen:
                continue
            seen.add(pairs)
            yield pairs


def find_bottom_star(pairs, width: int):
    """Shortest bottom-star circuit equivalent to ``pairs`` (CX only).

    Returns ``(star_pairs, wire_perm)`` with ``wire_perm`` None when no
    relabeling is needed, or None when nothing matches.
    """
    if width > MAX_STAR_WIDTH:
        raise ResourceLimitError(f"bottom-star search supports width <= {MAX_STAR_WIDTH}")
    target = _basis_image(pairs, width)
    best = None
    for star in _star_candidates(width):
        if best is not None and len(star) >= len(best[0]) + (best[1] is not None):
            continue
        image = _basis_image(star, width)
        if np.array_equal(image, target):
            best = (star, None)
            continue
        # target = relabel o star  ->  relabel = target o star^-1
        inverse = np.empty_like(image)
        inverse[image] = np.arange(image.size)
        perm = _wire_permutation_of(target[inverse], width)
        if perm is not None and (best is None or len(star) < len(best[0])):
            best = (star, perm)
    return best


@dataclass
class ReductionCheck:
    ordering: str
    reduction: str
    equivalent: bool
    max_deviation: float
    entangler_gates: int
    reduced_gates: int
    reduced_pairs: list = field(default_factory=list)
    wire_permutation: list | None = None


@dataclass
class ReductionReport:
    entangler: str
    width: int
    gate: str
    claim: str
    checks: list[ReductionCheck] = field(default_factory=list)

    @property
    def satisfying_orderings(self) -> list[str]:
        return [c.ordering for c in self.checks if c.equivalent and c.reduction == self.claim]

    @property
    def confirmed(self) -> bool:
        return bool(self.satisfying_orderings)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["confirmed"] = self.confirmed
        d["satisfying_orderings"] = self.satisfying_orderings
        return d


_CLAIMS = {EntanglerKind.FULL: "reversed-linear", EntanglerKind.CIRCULAR4: "bottom-star"}


def check_reduction(kind: EntanglerKind | str, width: int, gate: GateKind | str = GateKind.CX) -> ReductionReport:
    """Test the known reductions of one entangler under every alternative ordering."""
    kind = EntanglerKind(kind)
    gate = GateKind(gate)
    if gate is not GateKind.CX:
        raise InvalidArgumentError("reduction search is defined for CX entanglers")
    report = ReductionReport(kind.value, width, gate.value, _CLAIMS.get(kind, "none"))
    reversed_linear = entangler_circuit(reversed_linear_pairs(width), width, gate)
    for name, pairs in entangler_orderings(kind, width).items():
        block = entangler_circuit(pairs, width, gate)
        eq = unitary_equivalent(block, reversed_linear, up_to_global_phase=False)
        report.checks.append(ReductionCheck(name, "reversed-linear", eq.equivalent, eq.max_deviation,
                                            len(pairs), width - 1, [list(p) for p in reversed_linear_pairs(width)]))
        if width <= MAX_STAR_WIDTH:
            found = find_bottom_star(pairs, width)
            if found is None:
                report.checks.append(ReductionCheck(name, "bottom-star", False, float("nan"), len(pairs), 0))
                continue
            star, perm = found
            u_star = circuit_unitary(Circuit(width, tuple(Gate.cx(c, t) for c, t in star)))
            if perm is not None:
                u_star = wire_permutation_unitary(perm, width) @ u_star
            deviation = float(np.max(np.abs(circuit_unitary(block) - u_star)))
            report.checks.append(ReductionCheck(name, "bottom-star", deviation <= 1e-9, deviation, len(pairs),
                                                len(star), [list(p) for p in star],
                                                None if perm is None else list(perm)))
    return report
