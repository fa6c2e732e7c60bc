"""Strategies that realise quantum-output boxes from classical boxes,
shared entanglement, and output-conditioned local unitaries.

A strategy consists of a classical box, a shared entangled state, and one
local-unitary map per party.  Party j feeds its classical input to the
box, receives output o_j, and applies ``party_maps[j](input_j, o_j)`` to
its share of the state.  Simulating a strategy averages the resulting
states over the box's output distribution, which yields a quantum-output
box that is non-signalling whenever the classical box is.

The constructors in this module build strategies for several families of
target boxes: phase rotations of a two-level entangled state driven by
modular classical boxes, arbitrary maximally entangled families driven by
Haar couplings, families over non-maximally entangled states, arbitrary
non-signalling pure families via Schmidt-block couplings, and mixtures of
maximally disordered two-qubit states via Bell decomposition plus
interval alignment.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from cqboxes.boxes import (
    CCBox,
    CouplingBox,
    CQBox,
    HaarCouplingBox,
    coupling_to_ccbox,
    cq_no_signalling,
    mod_box,
    pr_box,
)
from cqboxes.quantum import (
    TOLERANCE,
    DensityMatrix,
    PartyStructure,
    StateVector,
    UnitaryOperator,
    _apply_axis,
    bell_state,
    partial_trace,
    pauli_x,
    pauli_z_power,
    phi_plus,
    schmidt,
)

__all__ = [
    "Strategy",
    "MixtureSchedule",
    "simulate",
    "sample_states",
    "phase_family_box",
    "unitary_family_box",
    "bit_flip_strategy",
    "sign_flip_strategy",
    "rational_phase_strategy",
    "irrational_phase_strategy",
    "max_entangled_strategy",
    "eight_output_strategy",
    "nonmax_pure_strategy",
    "general_pure_strategy",
    "bell_canonical_form",
    "mixture_align",
    "mixed_disordered_strategy",
]

PartyMap = Callable[[int, object], np.ndarray]


def _matrix_of(obj: object) -> np.ndarray:
    """Accept plain arrays and UnitaryOperator-like wrappers alike."""
    return np.asarray(getattr(obj, "matrix", obj), dtype=complex)


@dataclass(frozen=True)
class Strategy:
    """Classical box + shared state + output-conditioned local unitaries.

    ``party_maps[j]`` receives (input symbol, output symbol) and returns
    the unitary party j applies.  For finite boxes the output symbol is an
    integer; for Haar couplings it is the sampled unitary itself, and the
    map composes any input-local dressing around it.
    """

    ccbox: CCBox | CouplingBox | HaarCouplingBox
    shared: StateVector | DensityMatrix
    party_maps: tuple[PartyMap, ...]

    def __post_init__(self) -> None:
        parties = len(self.ccbox.input_sizes)
        if len(self.party_maps) != parties:
            raise ValueError(f"expected {parties} party maps, got {len(self.party_maps)}")
        if len(self.shared.structure.parties) != parties:
            raise ValueError("shared state party count does not match the classical box")

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return tuple(self.ccbox.input_sizes)


def _apply_each_party(amp: np.ndarray, dims: tuple[int, ...], mats: Sequence[np.ndarray]) -> np.ndarray:
    t = amp.reshape(dims)
    for j, m in enumerate(mats):
        t = _apply_axis(t, np.asarray(m, dtype=complex), j)
    return t.reshape(-1)


def _full_operator(mats: Sequence[np.ndarray]) -> np.ndarray:
    full = np.array([[1.0]], dtype=complex)
    for m in mats:
        full = np.kron(full, np.asarray(m, dtype=complex))
    return full


def _input_keys(sizes: Sequence[int]) -> list[tuple[int, ...]]:
    return [tuple(t) for t in itertools.product(*(range(s) for s in sizes))]


def simulate(strategy: Strategy, *, samples: int = 1000, seed: int = 0) -> CQBox:
    """The quantum-output box the strategy realises.

    Finite classical boxes are summed exactly.  Haar-coupling strategies
    return the empirical mixture over ``samples`` seeded draws, with
    Bob's sample stream drawn once so that it cannot depend on inputs.
    """
    if isinstance(strategy.ccbox, HaarCouplingBox):
        per_input = sample_states(strategy, samples=samples, seed=seed)
        structure = strategy.shared.structure
        outputs = {}
        for key, states in per_input.items():
            mat = np.zeros((structure.total_dim,) * 2, dtype=complex)
            for s in states:
                mat += np.outer(s.amplitudes, s.amplitudes.conj())
            outputs[key] = DensityMatrix(mat / len(states), structure)
        return CQBox(strategy.input_sizes, structure, outputs)

    ccbox = strategy.ccbox
    table_box = coupling_to_ccbox(ccbox) if isinstance(ccbox, CouplingBox) else ccbox
    structure = strategy.shared.structure
    dims = structure.dims
    pure_shared = isinstance(strategy.shared, StateVector)
    outputs = {}
    for key in _input_keys(table_box.input_sizes):
        mat = np.zeros((structure.total_dim,) * 2, dtype=complex)
        block = table_box.table[key]
        for out_key in np.argwhere(block > 0):
            p = block[tuple(out_key)]
            mats = [
                strategy.party_maps[j](key[j], int(out_key[j])) for j in range(len(dims))
            ]
            if pure_shared:
                vec = _apply_each_party(strategy.shared.amplitudes, dims, mats)
                mat += p * np.outer(vec, vec.conj())
            else:
                full = _full_operator(mats)
                mat += p * (full @ strategy.shared.matrix @ full.conj().T)
        outputs[key] = DensityMatrix(mat, structure)
    return CQBox(strategy.input_sizes, structure, outputs)


def sample_states(
    strategy: Strategy, *, samples: int = 1000, seed: int = 0
) -> dict[tuple[int, ...], list[StateVector]]:
    """Per-input list of the pure states produced by each coupling draw."""
    coupling = strategy.ccbox
    if not isinstance(coupling, HaarCouplingBox):
        raise TypeError("sample_states applies only to Haar-coupling strategies")
    if not isinstance(strategy.shared, StateVector):
        raise TypeError("Haar-coupling strategies require a pure shared state")
    if samples < 1:
        raise ValueError("at least one sample required")
    rng = np.random.default_rng(seed)
    bases = [coupling.draw_base(rng) for _ in range(samples)]
    structure = strategy.shared.structure
    dims = structure.dims
    result: dict[tuple[int, ...], list[StateVector]] = {}
    for key in _input_keys(coupling.input_sizes):
        states = []
        for base in bases:
            u_a, u_b = coupling.sample_pair(key, base)
            mats = (
                strategy.party_maps[0](key[0], u_a),
                strategy.party_maps[1](key[1], u_b),
            )
            vec = _apply_each_party(strategy.shared.amplitudes, dims, mats)
            states.append(StateVector(vec, structure))
        result[key] = states
    return result


def _passthrough(_inp: int, out: object) -> np.ndarray:
    return np.asarray(out, dtype=complex)


def _two_level_state(alpha: complex, beta: complex) -> StateVector:
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > TOLERANCE:
        raise ValueError("amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
    return StateVector(
        np.array([alpha, 0, 0, beta], dtype=complex), PartyStructure.pair(2)
    )


def phase_family_box(
    phase: Callable[[int, int], float], alpha: complex, beta: complex
) -> CQBox:
    """Target family alpha |00> + beta e^{i phase(x, y)} |11> over binary inputs."""
    states = {}
    for x, y in itertools.product(range(2), range(2)):
        states[(x, y)] = StateVector(
            np.array([alpha, 0, 0, beta * np.exp(1j * phase(x, y))]),
            PartyStructure.pair(2),
        )
    return CQBox.from_pure((2, 2), states)


def unitary_family_box(
    targets: Mapping[tuple[int, ...], np.ndarray] | Callable[[tuple[int, ...]], np.ndarray],
    n: int,
    input_sizes: Sequence[int] = (2, 2),
) -> CQBox:
    """Target family (T^{inputs} x 1) |phi+_n> for unitaries T^{inputs}."""
    get = targets if callable(targets) else (lambda key: targets[key])
    phi = phi_plus(n)
    states = {}
    for key in _input_keys(input_sizes):
        mat = _matrix_of(get(key))
        amp = (mat @ phi.amplitudes.reshape(n, n)).reshape(-1)
        states[key] = StateVector(amp, phi.structure)
    return CQBox.from_pure(tuple(input_sizes), states)


def bit_flip_strategy() -> Strategy:
    """Both parties flip their qubit of |phi+> when their box output is 1.

    Driven by the binary box with (a - b) mod 2 = x y, this realises the
    family that is |phi+> unless x = y = 1, where it is the bit-flipped
    Bell state (|01> + |10>)/sqrt2.
    """
    flip = pauli_x().matrix
    eye = np.eye(2, dtype=complex)

    def conditional_flip(_inp: int, out: int) -> np.ndarray:
        return flip if out else eye

    return Strategy(
        ccbox=pr_box(),
        shared=bell_state(0),
        party_maps=(conditional_flip, conditional_flip),
    )


def sign_flip_strategy(alpha: complex, beta: complex) -> Strategy:
    """Phase-flip realisation of alpha |00> + beta e^{i pi x y} |11>.

    Alice applies diag(1, e^{i pi a}) and Bob diag(1, e^{-i pi b}); the
    binary box guarantees a - b = x y mod 2, so the |11> component picks
    up exactly the phase pi x y regardless of the individual outputs.
    """
    return rational_phase_strategy(1, 2, alpha, beta)


def rational_phase_strategy(m: int, n: int, alpha: complex, beta: complex) -> Strategy:
    """Realise alpha |00> + beta e^{i 2 pi (m/n) x y} |11> exactly.

    Uses the n-output box with (a - b) mod n = x y; Alice applies
    diag(1, e^{i 2 pi a m / n}), Bob diag(1, e^{-i 2 pi b m / n}).  The
    fraction m/n is reduced first, so resources match the reduced
    denominator.
    """
    if n < 2:
        raise ValueError(f"denominator must be at least 2, got {n}")
    m = m % n
    if m == 0:
        m_red, n_red = 0, 2
    else:
        g = math.gcd(m, n)
        m_red, n_red = m // g, n // g

    def alice(_x: int, a: int) -> np.ndarray:
        return np.diag([1.0, np.exp(2j * math.pi * a * m_red / n_red)])

    def bob(_y: int, b: int) -> np.ndarray:
        return np.diag([1.0, np.exp(-2j * math.pi * b * m_red / n_red)])

    return Strategy(
        ccbox=mod_box(n_red),
        shared=_two_level_state(alpha, beta),
        party_maps=(alice, bob),
    )


def irrational_phase_strategy(
    theta: float,
    n: int,
    alpha: complex = 1 / math.sqrt(2),
    beta: complex = 1 / math.sqrt(2),
) -> tuple[Strategy, float]:
    """Approximate alpha |00> + beta e^{i 2 pi theta x y} |11> with an
    n-output box, rounding theta to the nearest multiple of 1/n.

    Returns the strategy together with an upper bound on the infidelity
    to the target at any input, derived from the phase error
    delta = 2 pi |theta - round(n theta)/n|:  the worst-case infidelity
    is 2 |alpha beta|^2 (1 - cos delta), padded by 1e-12 for arithmetic.
    """
    if n < 2:
        raise ValueError(f"output count must be at least 2, got {n}")
    m = round(n * theta)
    delta = 2 * math.pi * abs(theta - m / n)
    bound = min(1.0, 2 * (abs(alpha) * abs(beta)) ** 2 * (1 - math.cos(delta)) + 1e-12)
    return rational_phase_strategy(m, n, alpha, beta), bound


def max_entangled_strategy(
    targets: Mapping[tuple[int, ...], np.ndarray] | Callable[[tuple[int, ...]], np.ndarray],
    n: int,
    input_sizes: Sequence[int] = (2, 2),
) -> Strategy:
    """Realise the family (T^{x,y} x 1)|phi+_n> with a Haar coupling.

    Bob applies a Haar-random V, Alice applies T^{x,y} conj(V); since
    (conj(V) x V) leaves |phi+_n> invariant, every single draw already
    produces the target state exactly.
    """
    get = targets if callable(targets) else (lambda key: targets[key])

    def relabel(key: tuple[int, ...]) -> np.ndarray:
        mat = _matrix_of(get(key))
        if mat.shape != (n, n):
            raise ValueError(f"target for input {key} must be {n} x {n}, got {mat.shape}")
        return mat

    coupling = HaarCouplingBox(dim=n, input_sizes=tuple(input_sizes), relabel=relabel)
    return Strategy(
        ccbox=coupling,
        shared=phi_plus(n),
        party_maps=(_passthrough, _passthrough),
    )


def _derive_pairing(
    unitaries: Sequence[np.ndarray], target: np.ndarray, tol: float = 1e-9
) -> np.ndarray:
    """Bijection b -> a with U_a U_b+ proportional to the target unitary.

    For each b the candidate a's satisfy |tr(T+ U_a U_b+)| = d (equality
    up to a global phase); a deterministic backtracking search then picks
    a perfect matching, smallest candidates first.
    """
    d = target.shape[0]
    k = len(unitaries)
    candidates = []
    for b in range(k):
        options = []
        for a in range(k):
            overlap = abs(np.trace(target.conj().T @ unitaries[a] @ unitaries[b].conj().T))
            if abs(overlap - d) < tol:
                options.append(a)
        if not options:
            raise ValueError(f"no output label pairs with b = {b} for the given target")
        candidates.append(options)

    assignment = [-1] * k
    used: set[int] = set()

    def place(b: int) -> bool:
        if b == k:
            return True
        for a in candidates[b]:
            if a not in used:
                assignment[b] = a
                used.add(a)
                if place(b + 1):
                    return True
                used.discard(a)
                assignment[b] = -1
        return False

    if not place(0):
        raise ValueError("no bijection is consistent with the target")
    return np.array(assignment, dtype=int)


def eight_output_targets() -> dict[tuple[int, int], np.ndarray]:
    """Local target unitaries for the two-input/three-input family:
    identity except T^{1,1} = sqrt(Z) and T^{1,2} = X."""
    eye = np.eye(2, dtype=complex)
    return {
        (0, 0): eye,
        (0, 1): eye,
        (0, 2): eye,
        (1, 0): eye,
        (1, 1): pauli_z_power(0.5).matrix,
        (1, 2): pauli_x().matrix,
    }


def eight_output_strategy() -> Strategy:
    """Drive the x in {0,1}, y in {0,1,2} family from one 8-output coupling.

    The output alphabet labels the unitaries Z^{k/2} and Z^{k/2} X for
    k = 0..3; Alice applies U_a and Bob conj(U_b).  The pairing for each
    input is derived by search so that U_a U_b+ equals that input's
    target up to phase, which leaves the uniform marginal intact.
    """
    unitaries = [pauli_z_power(k / 2).matrix for k in range(4)]
    unitaries += [u @ pauli_x().matrix for u in unitaries[:4]]
    targets = eight_output_targets()
    bijections = {
        key: _derive_pairing(unitaries, target) for key, target in targets.items()
    }
    coupling = CouplingBox((2, 3), np.full(8, 1 / 8), bijections)

    def alice(_x: int, a: int) -> np.ndarray:
        return unitaries[a]

    def bob(_y: int, b: int) -> np.ndarray:
        return unitaries[b].conj()

    return Strategy(ccbox=coupling, shared=phi_plus(2), party_maps=(alice, bob))


def _as_fraction(value: object, context: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(
        f"{context} must be an exact Fraction (or int) number of turns, got {value!r}; "
        "irrational phases need the approximation strategy instead"
    )


def nonmax_pure_strategy(
    p: Sequence[float],
    phases: Mapping[tuple[int, int, int], Fraction | int]
    | Callable[[int, int, int], Fraction | int],
    local_a: Callable[[int], np.ndarray] | None = None,
    local_b: Callable[[int], np.ndarray] | None = None,
) -> Strategy:
    """Family U_A^x V_B^y W_A^{x,y} |Phi_p> over binary inputs, where
    |Phi_p> = sum_i sqrt(p_i)|ii> and W^{x,y}|i> = e^{i 2 pi phases(x,y,i)}|i>.

    The level phases, given as exact fractions of a turn, split into
    input-local parts (absorbed into diagonal dressings; Bob can carry
    the y-dependent part because diagonal phases act identically on
    either side of |Phi_p>) and an interaction part t_i * x * y.  The
    interaction is realised exactly by one L-output modular box, L being
    the common denominator of the t_i, with level-i phase steps of
    t_i * L / L turns per output unit.
    """
    weights = np.asarray(p, dtype=float)
    n = weights.shape[0]
    if n < 2:
        raise ValueError("at least two levels required")
    if abs(weights.sum() - 1.0) > TOLERANCE or np.min(weights) <= 0:
        raise ValueError("p must be strictly positive probabilities summing to 1")
    if np.any(np.diff(weights) >= 0):
        raise ValueError(
            "p must be strictly decreasing; repeated coefficients form degenerate "
            "blocks, which the general pure-family construction handles"
        )
    if callable(phases):
        get_phase = lambda x, y, i: _as_fraction(phases(x, y, i), f"phase ({x},{y},{i})")
    else:
        get_phase = lambda x, y, i: _as_fraction(
            phases.get((x, y, i), Fraction(0)), f"phase ({x},{y},{i})"
        )

    interaction = [
        get_phase(1, 1, i) - get_phase(1, 0, i) - get_phase(0, 1, i) + get_phase(0, 0, i)
        for i in range(n)
    ]
    denominator = 1
    for t in interaction:
        denominator = denominator * t.denominator // math.gcd(denominator, t.denominator)
    steps = [int(t * denominator) for t in interaction]

    local_a = local_a or (lambda _x: np.eye(n, dtype=complex))
    local_b = local_b or (lambda _y: np.eye(n, dtype=complex))

    def alice(x: int, a: int) -> np.ndarray:
        turns = [
            a * steps[i] / denominator + float(get_phase(x, 0, i)) for i in range(n)
        ]
        return _matrix_of(local_a(x)) @ np.diag(np.exp(2j * math.pi * np.array(turns)))

    def bob(y: int, b: int) -> np.ndarray:
        turns = [
            -b * steps[i] / denominator + float(get_phase(0, y, i) - get_phase(0, 0, i))
            for i in range(n)
        ]
        return _matrix_of(local_b(y)) @ np.diag(np.exp(2j * math.pi * np.array(turns)))

    if denominator == 1:
        table = np.full((2, 2, 1, 1), 1.0)
        box: CCBox = CCBox((2, 2), (1, 1), table)
    else:
        box = mod_box(denominator)

    shared = StateVector(
        np.diag(np.sqrt(weights)).reshape(-1).astype(complex), PartyStructure.pair(n)
    )
    return Strategy(ccbox=box, shared=shared, party_maps=(alice, bob))


def general_pure_strategy(targets: CQBox, tol: float = TOLERANCE) -> Strategy:
    """Strategy reproducing an arbitrary non-signalling pure family.

    The reference output at input (0, ..., 0) fixes Schmidt frames and
    coefficients; non-signalling forces every output to share the
    coefficient spectrum and to differ from the reference only by
    input-local unitaries U^x, V^y and a block unitary W^{x,y} acting
    within equal-coefficient Schmidt blocks.  W^{x,y} is handed to a
    block-diagonal Haar coupling (each block a maximally entangled
    subspace), whose draws reproduce each target exactly per sample.
    """
    if len(targets.input_sizes) != 2:
        raise ValueError("construction applies to two-party families")
    dims = targets.structure.dims
    if dims[0] != dims[1]:
        raise ValueError("construction requires equal local dimensions")
    n = dims[0]

    report = cq_no_signalling(targets, tol=max(tol, TOLERANCE))
    if not report.passed:
        raise ValueError(
            f"target family is signalling (worst violation {report.worst_violation:.3e})"
        )
    pure = {key: targets.pure_output(key) for key in targets.inputs}

    reference = pure[(0, 0)]
    form = schmidt(reference)
    coeffs = form.coefficients
    if coeffs[-1] < 1e-7:
        raise ValueError("reference state must have full Schmidt rank")
    frame_a = np.asarray(form.left_basis)
    frame_b = np.asarray(form.right_basis)
    inv_d = np.diag(1.0 / coeffs)
    block_dims = tuple(len(b) for b in form.blocks)

    def in_frames(key: tuple[int, ...]) -> np.ndarray:
        mat = pure[key].amplitudes.reshape(n, n)
        return frame_a.conj().T @ mat @ frame_b.conj()

    def check_unitary(mat: np.ndarray, what: str) -> np.ndarray:
        if np.max(np.abs(mat @ mat.conj().T - np.eye(n))) > 1e-6:
            raise ValueError(f"family structure broken: {what} is not unitary")
        return mat

    nx, ny = targets.input_sizes
    u_x = {x: check_unitary(in_frames((x, 0)) @ inv_d, f"row dressing at x={x}") for x in range(nx)}
    v_y = {y: check_unitary((inv_d @ in_frames((0, y))).T, f"column dressing at y={y}") for y in range(ny)}

    blocks_mask = np.zeros((n, n), dtype=bool)
    offset = 0
    for d in block_dims:
        blocks_mask[offset : offset + d, offset : offset + d] = True
        offset += d

    relabels = {}
    for key in targets.inputs:
        x, y = key
        w = u_x[x].conj().T @ in_frames(key) @ v_y[y].conj() @ inv_d
        off_block = np.abs(w[~blocks_mask])
        if off_block.size and off_block.max() > 1e-6:
            raise ValueError(
                f"family structure broken: coupling part at input {key} mixes "
                "Schmidt blocks of unequal coefficient"
            )
        relabels[key] = check_unitary(np.where(blocks_mask, w, 0.0), f"coupling part at {key}")

    coupling = HaarCouplingBox(
        dim=n,
        input_sizes=targets.input_sizes,
        relabel=lambda key: relabels[key],
        block_dims=block_dims,
        frame_a=frame_a,
        frame_b=frame_b,
    )

    dress_a = {x: frame_a @ u_x[x] @ frame_a.conj().T for x in range(nx)}
    dress_b = {y: frame_b @ v_y[y] @ frame_b.conj().T for y in range(ny)}

    def alice(x: int, out: object) -> np.ndarray:
        return dress_a[x] @ np.asarray(out, dtype=complex)

    def bob(y: int, out: object) -> np.ndarray:
        return dress_b[y] @ np.asarray(out, dtype=complex)

    return Strategy(ccbox=coupling, shared=reference, party_maps=(alice, bob))


_PAULI_XYZ = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# Bell state i equals (B_i x 1)|phi+> for these local unitaries
_BELL_LOCALS = (
    np.eye(2, dtype=complex),
    _PAULI_XYZ[0],
    _PAULI_XYZ[2],
    _PAULI_XYZ[2] @ _PAULI_XYZ[0],
)


def _su2_from_rotation(rot: np.ndarray) -> np.ndarray:
    from scipy.spatial.transform import Rotation

    x, y, z, w = Rotation.from_matrix(rot).as_quat()
    return w * np.eye(2, dtype=complex) - 1j * (
        x * _PAULI_XYZ[0] + y * _PAULI_XYZ[1] + z * _PAULI_XYZ[2]
    )


def _correlation_matrix(rho: np.ndarray) -> np.ndarray:
    t = np.empty((3, 3))
    for i, j in itertools.product(range(3), range(3)):
        t[i, j] = np.real(np.trace(rho @ np.kron(_PAULI_XYZ[i], _PAULI_XYZ[j])))
    return t


def _bell_weights_from_diagonal(t: np.ndarray) -> np.ndarray:
    t1, t2, t3 = t
    p = np.array(
        [
            1 + t1 - t2 + t3,
            1 + t1 + t2 - t3,
            1 - t1 + t2 + t3,
            1 - t1 - t2 - t3,
        ]
    ) / 4
    if np.min(p) < -1e-9:
        raise ValueError("correlation diagonal is not realisable by a Bell mixture")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def bell_canonical_form(
    rho: DensityMatrix,
) -> tuple[UnitaryOperator, UnitaryOperator, np.ndarray]:
    """Decompose a maximally disordered two-qubit state as local unitaries
    around a Bell-diagonal core: rho = (U x V) (sum_i p_i |B_i><B_i|) (U x V)+.

    The correlation matrix T_ij = tr(rho sigma_i x sigma_j) transforms as
    R(U) T R(V)^T under local unitaries; a sign-corrected singular value
    decomposition diagonalises it with proper rotations, which lift to
    SU(2).  If T is already diagonal the locals stay at the identity.
    """
    if rho.structure.dims != (2, 2):
        raise ValueError("two qubits required")
    for party in rho.structure.labels:
        marginal = partial_trace(rho, [party]).matrix
        if np.max(np.abs(marginal - np.eye(2) / 2)) > TOLERANCE:
            raise ValueError(f"party {party} marginal is not maximally mixed")

    t = _correlation_matrix(rho.matrix)
    off = t - np.diag(np.diagonal(t))
    eye = UnitaryOperator(np.eye(2, dtype=complex))
    if np.max(np.abs(off)) <= 1e-11:
        return eye, eye, _bell_weights_from_diagonal(np.diagonal(t))

    o1, s, o2t = np.linalg.svd(t)
    d1 = np.sign(np.linalg.det(o1))
    d2 = np.sign(np.linalg.det(o2t))
    r1 = o1 @ np.diag([1.0, 1.0, d1])
    r2 = o2t.T @ np.diag([1.0, 1.0, d2])
    diag = np.array([s[0], s[1], d1 * d2 * s[2]])
    u = _su2_from_rotation(r1)
    v = _su2_from_rotation(r2)
    return UnitaryOperator(u), UnitaryOperator(v), _bell_weights_from_diagonal(diag)


@dataclass(frozen=True)
class MixtureSchedule:
    """Common refinement of per-input mixture decompositions.

    Each interval carries a probability weight and, for every input, the
    index of the component that interval draws from.  Aggregating the
    interval weights by assigned index reproduces each input's original
    component probabilities.
    """

    intervals: tuple[tuple[float, Mapping[tuple[int, ...], int]], ...]
    families: Mapping[tuple[int, ...], tuple[tuple[float, int], ...]]
    pure_states: Mapping[tuple[int, ...], tuple[StateVector, ...]] | None = field(
        default=None, compare=False
    )

    def __post_init__(self) -> None:
        for key, family in self.families.items():
            for index in {idx for _, idx in family}:
                total = sum(w for w, assign in self.intervals if assign[key] == index)
                expected = sum(p for p, idx in family if idx == index)
                if abs(total - expected) > 1e-12:
                    raise ValueError(
                        f"interval aggregation for input {key} component {index} "
                        f"gives {total}, expected {expected}"
                    )

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for w, _ in self.intervals)


def mixture_align(
    families: Mapping[tuple[int, ...], Sequence[tuple[float, int]]],
) -> MixtureSchedule:
    """Align per-input mixtures on a common interval grid.

    Lays each input's components along [0, 1] in the given order and cuts
    at the union of all cumulative breakpoints; within one interval every
    input sticks to a single component.
    """
    cums: dict[tuple[int, ...], np.ndarray] = {}
    for key, family in families.items():
        probs = np.array([p for p, _ in family], dtype=float)
        if np.min(probs) < -TOLERANCE:
            raise ValueError(f"negative component probability for input {key}")
        if abs(probs.sum() - 1.0) > TOLERANCE:
            raise ValueError(f"component probabilities for input {key} do not sum to 1")
        cums[key] = np.cumsum(probs)

    points = np.concatenate([c for c in cums.values()] + [np.array([1.0])])
    points = np.sort(points[points > 1e-15])
    merged = [float(points[0])]
    for value in points[1:]:
        if value - merged[-1] > 1e-15:
            merged.append(float(value))
    merged[-1] = 1.0

    intervals = []
    lo = 0.0
    for hi in merged:
        width = hi - lo
        mid = (lo + hi) / 2
        assignment = {}
        for key, family in families.items():
            seg = int(np.searchsorted(cums[key], mid))
            seg = min(seg, len(family) - 1)
            assignment[key] = family[seg][1]
        intervals.append((width, assignment))
        lo = hi
    return MixtureSchedule(
        intervals=tuple(intervals),
        families={key: tuple(family) for key, family in families.items()},
    )


def mixed_disordered_strategy(box: CQBox) -> tuple[MixtureSchedule, list[Strategy]]:
    """Realise a family of maximally disordered two-qubit states as an
    interval mixture of maximally entangled pure strategies.

    Every output decomposes as local unitaries around a Bell mixture; the
    mixtures are aligned on a common interval grid, and each interval's
    column of (maximally entangled) pure states becomes one Haar-coupling
    strategy.  Sampling an interval with its weight and running its
    strategy reproduces the box.
    """
    if box.structure.dims != (2, 2):
        raise ValueError("two-qubit boxes required")
    locals_uv: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {}
    families: dict[tuple[int, ...], tuple[tuple[float, int], ...]] = {}
    for key in box.inputs:
        u, v, weights = bell_canonical_form(box.output(key))
        locals_uv[key] = (u.matrix, v.matrix)
        families[key] = tuple((float(w), i) for i, w in enumerate(weights))

    schedule = mixture_align(families)

    pure_states: dict[tuple[int, ...], tuple[StateVector, ...]] = {}
    phi = phi_plus(2)
    for key, (u, v) in locals_uv.items():
        states = []
        for i in range(4):
            mat = u @ _BELL_LOCALS[i] @ v.T
            states.append(
                StateVector((mat @ phi.amplitudes.reshape(2, 2)).reshape(-1), phi.structure)
            )
        pure_states[key] = tuple(states)
    schedule = MixtureSchedule(
        intervals=schedule.intervals,
        families=schedule.families,
        pure_states=pure_states,
    )

    strategies = []
    for _, assignment in schedule.intervals:
        targets = {
            key: locals_uv[key][0] @ _BELL_LOCALS[assignment[key]] @ locals_uv[key][1].T
            for key in box.inputs
        }
        strategies.append(max_entangled_strategy(targets, 2, box.input_sizes))
    return schedule, strategies
