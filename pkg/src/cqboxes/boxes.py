"""Classical and classical-input/quantum-output boxes and their
no-signalling verifiers.

A box takes one classical input per party.  A C-C box returns one
classical output per party according to a conditional probability table;
a C-Q box returns a joint quantum state.  Both kinds are non-signalling
when every proper subgroup of parties sees statistics (or a reduced
state) that do not depend on the inputs of the complementary parties.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from cqboxes.quantum import (
    TOLERANCE,
    DensityMatrix,
    PartyStructure,
    StateVector,
    _haar_matrix,
    partial_trace,
    trace_distance,
)

__all__ = [
    "CCBox",
    "CouplingBox",
    "HaarCouplingBox",
    "CQBox",
    "NoSignallingReport",
    "Witness",
    "pr_box",
    "mod_box",
    "coupling_to_ccbox",
    "haar_coupling",
    "cc_no_signalling",
    "cq_no_signalling",
    "induced_ccbox",
    "chsh_value",
    "cq_box_distance",
    "mix_boxes",
]


def _input_product(sizes: Sequence[int]) -> list[tuple[int, ...]]:
    return [tuple(t) for t in itertools.product(*(range(s) for s in sizes))]


@dataclass(frozen=True)
class CCBox:
    """Conditional probability table p(outputs | inputs) for k parties.

    ``table`` has shape ``input_sizes + output_sizes``, entries are
    non-negative and sum to one over outputs for every input setting.
    """

    input_sizes: tuple[int, ...]
    output_sizes: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        if len(self.input_sizes) != len(self.output_sizes):
            raise ValueError("one output alphabet per party required")
        tab = np.array(self.table, dtype=float)
        tab.setflags(write=False)
        object.__setattr__(self, "table", tab)
        expected = tuple(self.input_sizes) + tuple(self.output_sizes)
        if tab.shape != expected:
            raise ValueError(f"table shape {tab.shape} does not match {expected}")
        if np.min(tab) < -TOLERANCE:
            raise ValueError("probability table has negative entries")
        sums = tab.reshape(tuple(self.input_sizes) + (-1,)).sum(axis=-1)
        if np.max(np.abs(sums - 1.0)) > TOLERANCE:
            raise ValueError("probabilities do not sum to 1 for every input")

    @property
    def parties(self) -> int:
        return len(self.input_sizes)

    def probability(self, inputs: Sequence[int], outputs: Sequence[int]) -> float:
        return float(self.table[tuple(inputs) + tuple(outputs)])


@dataclass(frozen=True)
class CouplingBox:
    """Two-party box with a shared output marginal and per-input bijections.

    Both parties' outputs are distributed according to ``marginal``; under
    input pair (x, y) Alice's output is ``bijections[(x, y)]`` applied to
    Bob's.  Every bijection must preserve the marginal so that neither
    side's statistics depend on the other side's input.
    """

    input_sizes: tuple[int, ...]
    marginal: np.ndarray
    bijections: Mapping[tuple[int, ...], np.ndarray]

    def __post_init__(self) -> None:
        q = np.array(self.marginal, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "marginal", q)
        if np.min(q) < -TOLERANCE or abs(q.sum() - 1.0) > TOLERANCE:
            raise ValueError("marginal is not a probability distribution")
        n = q.shape[0]
        fixed: dict[tuple[int, ...], np.ndarray] = {}
        for key in _input_product(self.input_sizes):
            if key not in self.bijections:
                raise ValueError(f"missing bijection for input {key}")
            pi = np.array(self.bijections[key], dtype=int)
            pi.setflags(write=False)
            if sorted(pi.tolist()) != list(range(n)):
                raise ValueError(f"pairing for input {key} is not a bijection on 0..{n - 1}")
            if np.max(np.abs(q[pi] - q)) > TOLERANCE:
                # Alice's induced marginal q(pi(b)) must equal q itself
                raise ValueError(f"pairing for input {key} does not preserve the marginal")
            fixed[key] = pi
        object.__setattr__(self, "bijections", fixed)

    @property
    def n_outputs(self) -> int:
        return self.marginal.shape[0]


@dataclass(frozen=True)
class HaarCouplingBox:
    """Sampler-backed coupling over a continuous unitary output alphabet.

    Bob's output is a Haar-random unitary V, block-diagonal over
    ``block_dims`` (a single block by default).  Alice's output under a
    given input tuple is relabel(inputs) @ conj(V).  Optional frames
    rotate both outputs into a fixed computational-basis frame.  Bob's
    sample stream is drawn once, independent of the inputs.
    """

    dim: int
    input_sizes: tuple[int, ...]
    relabel: Callable[[tuple[int, ...]], np.ndarray]
    block_dims: tuple[int, ...] = ()
    frame_a: np.ndarray | None = None
    frame_b: np.ndarray | None = None

    def __post_init__(self) -> None:
        blocks = self.block_dims or (self.dim,)
        object.__setattr__(self, "block_dims", tuple(blocks))
        if sum(blocks) != self.dim:
            raise ValueError(f"block dimensions {blocks} do not sum to {self.dim}")

    def draw_base(self, rng: np.random.Generator) -> np.ndarray:
        """One block-diagonal Haar sample for Bob (input-independent)."""
        v = np.zeros((self.dim, self.dim), dtype=complex)
        offset = 0
        for d in self.block_dims:
            v[offset : offset + d, offset : offset + d] = _haar_matrix(d, rng)
            offset += d
        return v

    def sample_pair(
        self, inputs: tuple[int, ...], base: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """(Alice unitary, Bob unitary) for one base draw under ``inputs``."""
        u_a = np.asarray(self.relabel(inputs), dtype=complex) @ base.conj()
        u_b = base
        if self.frame_a is not None:
            u_a = self.frame_a @ u_a @ self.frame_a.conj().T
        if self.frame_b is not None:
            u_b = self.frame_b @ u_b @ self.frame_b.conj().T
        return u_a, u_b


@dataclass(frozen=True)
class CQBox:
    """Classical-input box whose output is a joint quantum state.

    ``outputs`` maps every input tuple (one input per party) to a density
    matrix over the shared party structure; rank-one matrices represent
    pure outputs.
    """

    input_sizes: tuple[int, ...]
    structure: PartyStructure
    outputs: Mapping[tuple[int, ...], DensityMatrix]
    _pure: Mapping[tuple[int, ...], StateVector] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if len(self.input_sizes) != len(self.structure.parties):
            raise ValueError("one classical input per party required")
        keys = _input_product(self.input_sizes)
        missing = [k for k in keys if k not in self.outputs]
        if missing:
            raise ValueError(f"outputs missing for inputs {missing}")
        for key in keys:
            if self.outputs[key].structure.dims != self.structure.dims:
                raise ValueError(f"output at {key} has mismatched party structure")
        object.__setattr__(self, "outputs", dict(self.outputs))

    @classmethod
    def from_pure(
        cls,
        input_sizes: Sequence[int],
        states: Mapping[tuple[int, ...], StateVector],
    ) -> "CQBox":
        structure = next(iter(states.values())).structure
        outputs = {key: state.density() for key, state in states.items()}
        return cls(tuple(input_sizes), structure, outputs, _pure=dict(states))

    @property
    def inputs(self) -> list[tuple[int, ...]]:
        return _input_product(self.input_sizes)

    def output(self, inputs: Sequence[int]) -> DensityMatrix:
        return self.outputs[tuple(inputs)]

    def pure_output(self, inputs: Sequence[int], tol: float = 1e-7) -> StateVector:
        """The output state as a vector; fails if the output is mixed."""
        key = tuple(inputs)
        if self._pure is not None and key in self._pure:
            return self._pure[key]
        vals, vecs = np.linalg.eigh(self.outputs[key].matrix)
        if vals[-1] < 1 - tol:
            raise ValueError(f"output at {key} is mixed (top eigenvalue {vals[-1]})")
        return StateVector(vecs[:, -1], self.structure)


@dataclass(frozen=True)
class Witness:
    """One observed dependence of a subgroup's statistics on outside inputs."""

    subgroup: tuple[str, ...]
    subgroup_inputs: tuple[int, ...]
    outside_inputs: tuple[tuple[int, ...], tuple[int, ...]]
    violation: float


@dataclass(frozen=True)
class NoSignallingReport:
    passed: bool
    worst_violation: float
    witnesses: tuple[Witness, ...]
    tolerance: float


def pr_box() -> CCBox:
    """Binary two-party box with p(a, b | x, y) = 1/2 iff (a - b) mod 2 = x * y."""
    return mod_box(2)


def mod_box(n: int) -> CCBox:
    """Two-party box over outputs 0..n-1 with uniform weight 1/n on the
    pairs satisfying (a - b) mod n = x * y, binary inputs."""
    if n < 2:
        raise ValueError(f"output alphabet must have at least 2 symbols, got {n}")
    table = np.zeros((2, 2, n, n))
    for x, y, a, b in itertools.product(range(2), range(2), range(n), range(n)):
        if (a - b) % n == x * y:
            table[x, y, a, b] = 1.0 / n
    return CCBox((2, 2), (n, n), table)


def coupling_to_ccbox(coupling: CouplingBox) -> CCBox:
    """Materialise a finite coupling as its probability table."""
    n = coupling.n_outputs
    sizes = coupling.input_sizes
    table = np.zeros(tuple(sizes) + (n, n))
    for key, pi in coupling.bijections.items():
        for b in range(n):
            table[key + (int(pi[b]), b)] = coupling.marginal[b]
    return CCBox(tuple(sizes), (n, n), table)


def haar_coupling(
    n: int,
    relabel: Callable[[tuple[int, ...]], np.ndarray],
    input_sizes: Sequence[int] = (2, 2),
    block_dims: Sequence[int] = (),
) -> HaarCouplingBox:
    """Coupling box whose shared marginal is the (block) Haar measure and
    whose pairing hands Alice relabel(inputs) @ conj(V) when Bob holds V."""
    return HaarCouplingBox(
        dim=n,
        input_sizes=tuple(input_sizes),
        relabel=relabel,
        block_dims=tuple(block_dims),
    )


def _tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return float(0.5 * np.sum(np.abs(p - q)))


def _proper_subgroups(k: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for r in range(1, k):
        out.extend(itertools.combinations(range(k), r))
    return out


def cc_no_signalling(box: CCBox, tol: float = TOLERANCE) -> NoSignallingReport:
    """Check that every proper subgroup's output marginal, given its own
    inputs, is independent of the complementary parties' inputs."""
    k = box.parties
    labels = tuple(chr(ord("A") + i) for i in range(k))
    worst = 0.0
    witnesses: list[Witness] = []
    for subgroup in _proper_subgroups(k):
        complement = tuple(i for i in range(k) if i not in subgroup)
        # marginal over the complement's outputs, axes: all inputs + subgroup outputs
        marg = box.table.sum(axis=tuple(k + i for i in complement))
        for own in itertools.product(*(range(box.input_sizes[i]) for i in subgroup)):
            dists = []
            for outside in itertools.product(
                *(range(box.input_sizes[i]) for i in complement)
            ):
                idx = [0] * k
                for pos, i in enumerate(subgroup):
                    idx[i] = own[pos]
                for pos, i in enumerate(complement):
                    idx[i] = outside[pos]
                dists.append((outside, marg[tuple(idx)].ravel()))
            for (o1, p1), (o2, p2) in itertools.combinations(dists, 2):
                d = _tv_distance(p1, p2)
                worst = max(worst, d)
                if d > tol:
                    witnesses.append(
                        Witness(
                            subgroup=tuple(labels[i] for i in subgroup),
                            subgroup_inputs=own,
                            outside_inputs=(o1, o2),
                            violation=d,
                        )
                    )
    return NoSignallingReport(
        passed=worst <= tol,
        worst_violation=worst,
        witnesses=tuple(witnesses),
        tolerance=tol,
    )


def cq_no_signalling(box: CQBox, tol: float = TOLERANCE) -> NoSignallingReport:
    """Check that every proper subgroup's reduced state, given its own
    inputs, is independent (in trace distance) of the outside inputs."""
    k = len(box.input_sizes)
    labels = box.structure.labels
    worst = 0.0
    witnesses: list[Witness] = []
    for subgroup in _proper_subgroups(k):
        keep = [labels[i] for i in subgroup]
        complement = tuple(i for i in range(k) if i not in subgroup)
        for own in itertools.product(*(range(box.input_sizes[i]) for i in subgroup)):
            reduced = []
            for outside in itertools.product(
                *(range(box.input_sizes[i]) for i in complement)
            ):
                idx = [0] * k
                for pos, i in enumerate(subgroup):
                    idx[i] = own[pos]
                for pos, i in enumerate(complement):
                    idx[i] = outside[pos]
                reduced.append((outside, partial_trace(box.output(idx), keep)))
            for (o1, r1), (o2, r2) in itertools.combinations(reduced, 2):
                d = trace_distance(r1, r2)
                worst = max(worst, d)
                if d > tol:
                    witnesses.append(
                        Witness(
                            subgroup=tuple(keep),
                            subgroup_inputs=own,
                            outside_inputs=(o1, o2),
                            violation=d,
                        )
                    )
    return NoSignallingReport(
        passed=worst <= tol,
        worst_violation=worst,
        witnesses=tuple(witnesses),
        tolerance=tol,
    )


def induced_ccbox(
    box: CQBox,
    measurements: Sequence[Sequence[np.ndarray]],
) -> CCBox:
    """Measure every party of a C-Q box in per-input orthonormal bases.

    ``measurements[j][x]`` is a unitary whose columns are party j's
    measurement basis under its input x; the result is the Born-rule
    probability table.
    """
    k = len(box.input_sizes)
    if len(measurements) != k:
        raise ValueError("one measurement family per party required")
    dims = box.structure.dims
    for j in range(k):
        if len(measurements[j]) != box.input_sizes[j]:
            raise ValueError(f"party {j} needs one basis per input symbol")
        for basis in measurements[j]:
            if np.asarray(basis).shape != (dims[j], dims[j]):
                raise ValueError(f"basis for party {j} has wrong shape")
    table = np.zeros(tuple(box.input_sizes) + dims)
    for key in box.inputs:
        frame = np.array([[1.0]], dtype=complex)
        for j in range(k):
            frame = np.kron(frame, np.asarray(measurements[j][key[j]], dtype=complex))
        rotated = frame.conj().T @ box.output(key).matrix @ frame
        probs = np.clip(np.real(np.diagonal(rotated)), 0.0, None)
        table[key] = probs.reshape(dims)
    return CCBox(tuple(box.input_sizes), dims, table)


def chsh_value(box: CCBox) -> float:
    """E(0,0) + E(0,1) + E(1,0) - E(1,1) with outcomes (-1)^a, (-1)^b."""
    if box.input_sizes != (2, 2) or box.output_sizes != (2, 2):
        raise ValueError("binary two-party box required")
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])  # (-1)^(a+b)
    corr = np.einsum("xyab,ab->xy", box.table, signs)
    return float(corr[0, 0] + corr[0, 1] + corr[1, 0] - corr[1, 1])


def cq_box_distance(box_a: CQBox, box_b: CQBox) -> float:
    """Largest trace distance between the two boxes' outputs over inputs."""
    if box_a.input_sizes != box_b.input_sizes or box_a.structure.dims != box_b.structure.dims:
        raise ValueError("boxes must share input alphabets and party structure")
    return max(
        trace_distance(box_a.output(key), box_b.output(key)) for key in box_a.inputs
    )


def mix_boxes(weighted: Sequence[tuple[float, CQBox]]) -> CQBox:
    """Convex mixture of C-Q boxes with matching structure."""
    if not weighted:
        raise ValueError("mixture requires at least one component")
    weights = np.array([w for w, _ in weighted], dtype=float)
    if np.min(weights) < -TOLERANCE or abs(weights.sum() - 1.0) > TOLERANCE:
        raise ValueError("mixture weights must form a probability distribution")
    first = weighted[0][1]
    outputs = {}
    for key in first.inputs:
        mat = np.zeros((first.structure.total_dim,) * 2, dtype=complex)
        for w, box in weighted:
            mat += w * box.output(key).matrix
        outputs[key] = DensityMatrix(mat, first.structure)
    return CQBox(first.input_sizes, first.structure, outputs)
