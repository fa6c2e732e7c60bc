"""Dense linear algebra for small multi-party quantum states.

States carry an explicit ordered party structure of (label, dimension)
pairs.  Amplitudes and matrices are stored in the canonical tensor order
of that structure (first party most significant).  All operations are
pure functions, address parties by label, and run in double-precision
complex arithmetic.  Validity checks use a global default tolerance of
``TOLERANCE``; callers may override it per call where it matters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TOLERANCE = 1e-9
MAX_TENSOR_DIM = 4096

__all__ = [
    "TOLERANCE",
    "MAX_TENSOR_DIM",
    "PartyStructure",
    "StateVector",
    "DensityMatrix",
    "UnitaryOperator",
    "SchmidtForm",
    "tensor",
    "partial_trace",
    "apply_local",
    "fidelity",
    "trace_distance",
    "basis_state",
    "bell_state",
    "phi_plus",
    "w_state",
    "pauli_x",
    "pauli_z_power",
    "phase_diag",
    "su2",
    "haar_unitary",
    "schmidt",
    "check_uu_star_invariance",
]


def _frozen(a: np.ndarray, dtype=complex) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PartyStructure:
    """Ordered collection of parties, each a (label, dimension) pair."""

    parties: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        labels = [label for label, _ in self.parties]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate party labels: {labels}")
        for label, dim in self.parties:
            if dim < 1:
                raise ValueError(f"party {label!r} has non-positive dimension {dim}")

    @classmethod
    def qubits(cls, labels: str) -> "PartyStructure":
        return cls(tuple((label, 2) for label in labels))

    @classmethod
    def pair(cls, dim_a: int, dim_b: int | None = None) -> "PartyStructure":
        return cls((("A", dim_a), ("B", dim_b if dim_b is not None else dim_a)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.parties)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.parties)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims)) if self.parties else 1

    def index_of(self, label: str) -> int:
        for i, (name, _) in enumerate(self.parties):
            if name == label:
                return i
        raise KeyError(f"unknown party label {label!r}; have {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.parties[self.index_of(label)][1]

    def subset(self, keep: Sequence[str]) -> "PartyStructure":
        keep_idx = sorted(self.index_of(label) for label in keep)
        return PartyStructure(tuple(self.parties[i] for i in keep_idx))


@dataclass(frozen=True)
class StateVector:
    """Pure state: unit-norm complex amplitude vector over a party structure."""

    amplitudes: np.ndarray
    structure: PartyStructure

    def __post_init__(self) -> None:
        amp = _frozen(np.asarray(self.amplitudes).ravel())
        object.__setattr__(self, "amplitudes", amp)
        if amp.shape != (self.structure.total_dim,):
            raise ValueError(
                f"amplitude length {amp.shape[0]} does not match "
                f"structure dimension {self.structure.total_dim}"
            )
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > TOLERANCE:
            raise ValueError(f"state vector norm {norm} deviates from 1 beyond tolerance")

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.structure)


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state: Hermitian, positive semidefinite, unit trace."""

    matrix: np.ndarray
    structure: PartyStructure

    def __post_init__(self) -> None:
        mat = _frozen(np.asarray(self.matrix))
        object.__setattr__(self, "matrix", mat)
        d = self.structure.total_dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match structure dimension {d}")
        if np.max(np.abs(mat - mat.conj().T)) > TOLERANCE:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(mat).real - 1.0) > TOLERANCE:
            raise ValueError(f"density matrix trace {np.trace(mat)} deviates from 1")
        if np.min(np.linalg.eigvalsh(mat)) < -TOLERANCE:
            raise ValueError("density matrix has a negative eigenvalue beyond tolerance")


@dataclass(frozen=True)
class UnitaryOperator:
    """Square complex matrix satisfying U U+ = 1 within tolerance."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = _frozen(np.asarray(self.matrix))
        object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"unitary must be square, got shape {mat.shape}")
        d = mat.shape[0]
        if np.max(np.abs(mat @ mat.conj().T - np.eye(d))) > TOLERANCE:
            raise ValueError("matrix is not unitary within tolerance")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SchmidtForm:
    """Bipartite decomposition psi = sum_i c_i |l_i>|r_i>.

    ``coefficients`` are non-negative and non-increasing; column i of
    ``left_basis`` / ``right_basis`` holds |l_i> / |r_i>.  ``blocks``
    groups coefficient indices that are degenerate within 1e-7.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    blocks: tuple[tuple[int, ...], ...]
    structure: PartyStructure

    def reconstruct(self) -> np.ndarray:
        d_a, d_b = self.structure.dims
        mat = np.zeros((d_a, d_b), dtype=complex)
        for i, c in enumerate(self.coefficients):
            mat += c * np.outer(self.left_basis[:, i], self.right_basis[:, i])
        return mat.reshape(-1)


StateLike = StateVector | DensityMatrix


def _as_density(state: StateLike) -> DensityMatrix:
    return state.density() if isinstance(state, StateVector) else state


def _unitary_matrix(u: UnitaryOperator | np.ndarray) -> np.ndarray:
    return u.matrix if isinstance(u, UnitaryOperator) else np.asarray(u, dtype=complex)


def tensor(states: Sequence[StateLike]) -> StateLike:
    """Tensor product of states of the same kind, concatenating party structures."""
    if not states:
        raise ValueError("tensor requires at least one state")
    kinds = {type(s) for s in states}
    if len(kinds) > 1:
        raise ValueError("tensor requires all states of the same kind (vector or density)")
    parties: list[tuple[str, int]] = []
    for s in states:
        parties.extend(s.structure.parties)
    structure = PartyStructure(tuple(parties))
    if structure.total_dim > MAX_TENSOR_DIM:
        raise ValueError(
            f"composite dimension {structure.total_dim} exceeds cap {MAX_TENSOR_DIM}"
        )
    if isinstance(states[0], StateVector):
        amp = states[0].amplitudes
        for s in states[1:]:
            amp = np.kron(amp, s.amplitudes)
        return StateVector(amp, structure)
    mat = states[0].matrix
    for s in states[1:]:
        mat = np.kron(mat, s.matrix)
    return DensityMatrix(mat, structure)


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix on the parties in ``keep`` (original order kept)."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one party")
    structure = rho.structure
    keep_idx = sorted(structure.index_of(label) for label in keep)
    dims = structure.dims
    k = len(dims)
    t = rho.matrix.reshape(dims + dims)
    remaining = k
    for j in sorted(set(range(k)) - set(keep_idx), reverse=True):
        t = np.trace(t, axis1=j, axis2=j + remaining)
        remaining -= 1
    sub = structure.subset([structure.labels[i] for i in keep_idx])
    return DensityMatrix(t.reshape(sub.total_dim, sub.total_dim), sub)


def _apply_axis(tensor_arr: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    moved = np.tensordot(mat, tensor_arr, axes=([1], [axis]))
    return np.moveaxis(moved, 0, axis)


def apply_local(state: StateLike, party: str, u: UnitaryOperator | np.ndarray) -> StateLike:
    """Apply a unitary to one party of a pure or mixed state."""
    mat = _unitary_matrix(u)
    structure = state.structure
    j = structure.index_of(party)
    dims = structure.dims
    if mat.shape != (dims[j], dims[j]):
        raise ValueError(
            f"operator shape {mat.shape} does not match party {party!r} dimension {dims[j]}"
        )
    if isinstance(state, StateVector):
        t = state.amplitudes.reshape(dims)
        t = _apply_axis(t, mat, j)
        return StateVector(t.reshape(-1), structure)
    k = len(dims)
    t = state.matrix.reshape(dims + dims)
    t = _apply_axis(t, mat, j)
    t = _apply_axis(t, mat.conj(), j + k)
    d = structure.total_dim
    return DensityMatrix(t.reshape(d, d), structure)


def _check_same_structure(p: StateLike, q: StateLike) -> None:
    if p.structure.dims != q.structure.dims:
        raise ValueError(
            f"state structures differ: {p.structure.parties} vs {q.structure.parties}"
        )


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    # zero the numerical-noise eigenvalues of rank-deficient inputs, which
    # would otherwise pollute the square root at the sqrt(eps) scale
    vals = np.clip(vals, 0.0, None)
    if vals[-1] > 0:
        vals[vals < vals[-1] * 1e-12] = 0.0
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(p: StateLike, q: StateLike) -> float:
    """Fidelity in [0, 1]; for pure states |<p|q>|^2, Uhlmann in general."""
    _check_same_structure(p, q)
    if isinstance(p, StateVector) and isinstance(q, StateVector):
        return float(min(1.0, abs(np.vdot(p.amplitudes, q.amplitudes)) ** 2))
    rho = _as_density(p).matrix
    sigma = _as_density(q).matrix
    singulars = np.linalg.svd(_psd_sqrt(rho) @ _psd_sqrt(sigma), compute_uv=False)
    return float(min(1.0, np.sum(singulars) ** 2))


def trace_distance(p: StateLike, q: StateLike) -> float:
    """Trace distance (half the trace norm of the difference) in [0, 1]."""
    _check_same_structure(p, q)
    delta = _as_density(p).matrix - _as_density(q).matrix
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(delta))))


def basis_state(structure: PartyStructure, levels: Sequence[int]) -> StateVector:
    """Computational basis state |levels> over the given structure."""
    dims = structure.dims
    if len(levels) != len(dims):
        raise ValueError("one level per party required")
    amp = np.zeros(structure.total_dim, dtype=complex)
    amp[int(np.ravel_multi_index(tuple(levels), dims))] = 1.0
    return StateVector(amp, structure)


_BELL_AMPLITUDES = (
    np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2),
    np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2),
    np.array([1, 0, 0, -1], dtype=complex) / math.sqrt(2),
    np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2),
)


def bell_state(i: int) -> StateVector:
    """Two-qubit Bell state: 0 -> (|00>+|11>)/sqrt2, 1 -> (|01>+|10>)/sqrt2,
    2 -> (|00>-|11>)/sqrt2, 3 -> (|01>-|10>)/sqrt2."""
    if i not in (0, 1, 2, 3):
        raise ValueError(f"Bell index must be 0..3, got {i}")
    return StateVector(_BELL_AMPLITUDES[i], PartyStructure.qubits("AB"))


def phi_plus(n: int) -> StateVector:
    """Maximally entangled state (1/sqrt n) sum_i |ii> on two n-level parties."""
    if n < 2:
        raise ValueError(f"local dimension must be at least 2, got {n}")
    amp = np.zeros(n * n, dtype=complex)
    amp[:: n + 1] = 1.0 / math.sqrt(n)
    return StateVector(amp, PartyStructure.pair(n))


def w_state() -> StateVector:
    """Three-qubit state (|100>+|010>+|001>)/sqrt3."""
    amp = np.zeros(8, dtype=complex)
    amp[[4, 2, 1]] = 1.0 / math.sqrt(3)
    return StateVector(amp, PartyStructure.qubits("ABC"))


def pauli_x() -> UnitaryOperator:
    return UnitaryOperator(np.array([[0, 1], [1, 0]], dtype=complex))


def pauli_z_power(t: float) -> UnitaryOperator:
    """diag(1, exp(i pi t)); t = 1 gives Pauli Z."""
    return UnitaryOperator(np.diag([1.0, np.exp(1j * math.pi * t)]))


def phase_diag(angles: Sequence[float]) -> UnitaryOperator:
    """Diagonal phase gate diag(exp(i angle_j))."""
    return UnitaryOperator(np.diag(np.exp(1j * np.asarray(angles, dtype=float))))


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def su2(axis: Sequence[float], angle: float) -> UnitaryOperator:
    """Qubit rotation by ``angle`` about the unit Bloch vector ``axis``:
    cos(angle/2) 1 - i sin(angle/2) (axis . sigma)."""
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > TOLERANCE:
        raise ValueError(f"axis must be a unit 3-vector, got {axis}")
    nsigma = n[0] * _PAULI[0] + n[1] * _PAULI[1] + n[2] * _PAULI[2]
    return UnitaryOperator(
        math.cos(angle / 2) * np.eye(2, dtype=complex) - 1j * math.sin(angle / 2) * nsigma
    )


def _haar_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_unitary(n: int, seed: int | np.random.Generator) -> UnitaryOperator:
    """Haar-distributed random unitary, deterministic given the seed.

    Drawn as the QR factor of a complex Ginibre matrix with the R-diagonal
    phases folded back in, which makes the distribution exactly invariant
    under left and right multiplication by fixed unitaries.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return UnitaryOperator(_haar_matrix(n, rng))


def schmidt(state: StateVector, degeneracy_tol: float = 1e-7) -> SchmidtForm:
    """Schmidt decomposition of a bipartite pure state."""
    dims = state.structure.dims
    if len(dims) != 2:
        raise ValueError(f"Schmidt decomposition requires exactly 2 parties, got {len(dims)}")
    mat = state.amplitudes.reshape(dims)
    left, coeffs, right_h = np.linalg.svd(mat, full_matrices=True)
    blocks: list[tuple[int, ...]] = []
    current = [0]
    for i in range(1, len(coeffs)):
        if abs(coeffs[i] - coeffs[i - 1]) <= degeneracy_tol:
            current.append(i)
        else:
            blocks.append(tuple(current))
            current = [i]
    blocks.append(tuple(current))
    form = SchmidtForm(
        coefficients=_frozen(coeffs, dtype=float),
        left_basis=_frozen(left),
        right_basis=_frozen(right_h.T),
        blocks=tuple(blocks),
        structure=state.structure,
    )
    if np.linalg.norm(form.reconstruct() - state.amplitudes) > 1e-9:
        raise ArithmeticError("Schmidt reconstruction failed validation")
    return form


def check_uu_star_invariance(u: UnitaryOperator | np.ndarray, n: int) -> float:
    """Norm of (U x conj(U)) |phi+_n> - |phi+_n>; zero for any unitary U."""
    mat = _unitary_matrix(u)
    if mat.shape != (n, n):
        raise ValueError(f"expected an {n} x {n} unitary, got shape {mat.shape}")
    phi = phi_plus(n).amplitudes
    moved = np.kron(mat, mat.conj()) @ phi
    return float(np.linalg.norm(moved - phi))
