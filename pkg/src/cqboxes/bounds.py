"""How well a conditional-phase family can be approximated when the
classical resource has fewer outputs than the phase denominator.

The target is the family alpha |00> + beta e^{i 2 pi (m/n) x y} |11>.
With an n-output modular box it is reached exactly; here the resource is
restricted to a k-output coupling (a shared marginal plus one
marginal-preserving output pairing per input) with arbitrary
output-conditioned phases on each side.  ``best_fidelity`` returns the
exact optimum of the mean fidelity over the four inputs, together with a
strategy certificate achieving it, and ``verify_bound`` confirms the
optimum numerically by direct ascent over the strategy parameters.

Reduction behind the closed form (each step is exact):

* Output relabelings per party and per input absorb three of the four
  pairings into the phase tables, leaving the identity except one
  permutation P at input (1, 1).
* The mean fidelity is linear in the shared marginal, so some vertex of
  the P-invariant distributions is optimal; vertices are uniform on a
  single P-orbit, an L-cycle with L <= k.
* On one L-cycle the 4 L cosine arguments are free except for one signed
  sum fixed to L theta modulo 2 pi; concavity makes the equal split
  optimal, giving mean cosine cos(g_L / (4 L)) with g_L the distance of
  L theta from the nearest multiple of 2 pi.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from cqboxes.boxes import CouplingBox
from cqboxes.quantum import TOLERANCE, fidelity
from cqboxes.synthesis import Strategy, _two_level_state, phase_family_box, simulate

__all__ = [
    "PhaseStrategySpec",
    "BoundResult",
    "BoundCheck",
    "spec_to_strategy",
    "phase_strategy_fidelity",
    "best_fidelity",
    "verify_bound",
]


@dataclass(frozen=True)
class PhaseStrategySpec:
    """A k-output phase strategy: shared marginal, per-input pairings, and
    output-conditioned phases (radians, on the |1> level) for each party."""

    marginal: np.ndarray
    alice_phases: np.ndarray
    bob_phases: np.ndarray
    pairings: Mapping[tuple[int, int], np.ndarray]

    def __post_init__(self) -> None:
        q = np.array(self.marginal, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "marginal", q)
        k = q.shape[0]
        for name in ("alice_phases", "bob_phases"):
            phases = np.array(getattr(self, name), dtype=float)
            phases.setflags(write=False)
            object.__setattr__(self, name, phases)
            if phases.shape != (2, k):
                raise ValueError(f"{name} must have shape (2, {k}), got {phases.shape}")

    @property
    def n_outputs(self) -> int:
        return self.marginal.shape[0]


def spec_to_strategy(spec: PhaseStrategySpec, alpha: float, beta: float) -> Strategy:
    """Materialise a phase-strategy specification on the two-level
    shared state alpha |00> + beta |11>."""
    coupling = CouplingBox((2, 2), spec.marginal, dict(spec.pairings))

    def alice(x: int, a: int) -> np.ndarray:
        return np.diag([1.0, np.exp(1j * spec.alice_phases[x, a])])

    def bob(y: int, b: int) -> np.ndarray:
        return np.diag([1.0, np.exp(1j * spec.bob_phases[y, b])])

    return Strategy(ccbox=coupling, shared=_two_level_state(alpha, beta), party_maps=(alice, bob))


def phase_strategy_fidelity(
    spec: PhaseStrategySpec,
    alpha: float,
    beta: float,
    phase: Callable[[int, int], float],
) -> float:
    """Mean fidelity (over the four inputs) between the simulated strategy
    output and the target phase family.  Runs the full simulation rather
    than a closed-form shortcut."""
    box = simulate(spec_to_strategy(spec, alpha, beta))
    target = phase_family_box(phase, alpha, beta)
    return float(
        np.mean([fidelity(box.output(key), target.pure_output(key)) for key in box.inputs])
    )


def _fast_mean_fidelity(
    spec: PhaseStrategySpec, alpha: float, beta: float, phase: Callable[[int, int], float]
) -> float:
    cross = 2 * (alpha * beta) ** 2
    flat = alpha**4 + beta**4
    total = 0.0
    for x, y in itertools.product(range(2), range(2)):
        pi = spec.pairings[(x, y)]
        angles = (
            spec.alice_phases[x, pi] + spec.bob_phases[y, np.arange(spec.n_outputs)]
            - phase(x, y)
        )
        total += flat + cross * float(np.dot(spec.marginal, np.cos(angles)))
    return total / 4


@dataclass(frozen=True)
class BoundResult:
    """Optimal mean fidelity for the (m/n)-phase family from k outputs."""

    n: int
    k: int
    m: int
    alpha: float
    beta: float
    value: float
    delta: float
    cycle_length: int
    certificate: PhaseStrategySpec


@dataclass(frozen=True)
class BoundCheck:
    """Numerical confirmation of a bound by direct parameter ascent."""

    bound: BoundResult
    optimum: float
    confirmed: bool
    slack: float
    reach: float


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def _cycle_gap(theta: float, length: int) -> float:
    """Distance of L theta from the nearest multiple of 2 pi."""
    return abs(_wrap(length * theta))


def _certificate(n_outputs: int, length: int, theta: float) -> PhaseStrategySpec:
    """Equal-split phase assignment on one L-cycle, identity elsewhere.

    Walking the cycle advances Alice's x=0 phase by 4 chi + theta per
    step, which closes after L steps exactly when 4 L chi = -L theta
    modulo 2 pi; every one of the 4 L cosine arguments then equals chi up
    to sign.
    """
    chi = -_wrap(length * theta) / (4 * length)
    a0 = np.zeros(n_outputs)
    for j in range(1, length):
        a0[j] = a0[j - 1] + 4 * chi + theta
    a1 = a0.copy()
    b0 = np.zeros(n_outputs)
    b1 = np.zeros(n_outputs)
    a1[:length] = a0[:length] - 2 * chi
    b0[:length] = chi - a0[:length]
    b1[:length] = -chi - a0[:length]

    identity = np.arange(n_outputs)
    shifted = identity.copy()
    shifted[:length] = (identity[:length] + 1) % length
    marginal = np.zeros(n_outputs)
    marginal[:length] = 1.0 / length
    return PhaseStrategySpec(
        marginal=marginal,
        alice_phases=np.vstack([a0, a1]),
        bob_phases=np.vstack([b0, b1]),
        pairings={(0, 0): identity, (0, 1): identity, (1, 0): identity, (1, 1): shifted},
    )


def best_fidelity(
    n: int, k: int, alpha: float = 0.8, beta: float = 0.6, m: int = 1
) -> BoundResult:
    """Exact optimum of the mean fidelity to the (m/n)-phase family over
    all k-output phase strategies, with an achieving certificate."""
    if n < 2 or k < 1:
        raise ValueError("need a phase denominator n >= 2 and at least one output")
    if alpha <= 0 or beta <= 0 or abs(alpha**2 + beta**2 - 1.0) > TOLERANCE:
        raise ValueError("alpha, beta must be positive with alpha^2 + beta^2 = 1")
    theta = 2 * math.pi * m / n
    best_cos, best_length = -1.0, 1
    for length in range(1, k + 1):
        value = math.cos(_cycle_gap(theta, length) / (4 * length))
        if value > best_cos + 1e-15:
            best_cos, best_length = value, length
    value = alpha**4 + beta**4 + 2 * (alpha * beta) ** 2 * best_cos
    return BoundResult(
        n=n,
        k=k,
        m=m,
        alpha=alpha,
        beta=beta,
        value=value,
        delta=1.0 - value,
        cycle_length=best_length,
        certificate=_certificate(k, best_length, theta),
    )


def _ascend_cycle(
    theta: float, length: int, rng: np.random.Generator, sweeps: int = 300
) -> float:
    """Coordinate ascent on the mean cosine over one L-cycle.

    Each phase variable enters exactly two cosine terms, so its exact
    one-variable optimum is the negated argument of the sum of the two
    partner phasors.
    """
    a0, a1, b0, b1 = (rng.uniform(-math.pi, math.pi, size=length) for _ in range(4))
    nxt = (np.arange(length) + 1) % length
    prv = (np.arange(length) - 1) % length

    def objective() -> float:
        return float(
            np.sum(np.cos(a0 + b0))
            + np.sum(np.cos(a0 + b1))
            + np.sum(np.cos(a1 + b0))
            + np.sum(np.cos(a1[nxt] + b1 - theta))
        ) / (4 * length)

    previous = objective()
    for _ in range(sweeps):
        for j in range(length):
            a0[j] = -np.angle(np.exp(1j * b0[j]) + np.exp(1j * b1[j]))
            # a1[j] partners: b0[j] at input (1,0) and, at (1,1), the b1
            # entry whose pairing lands on j
            a1[j] = -np.angle(np.exp(1j * b0[j]) + np.exp(1j * (b1[prv[j]] - theta)))
            b0[j] = -np.angle(np.exp(1j * a0[j]) + np.exp(1j * a1[j]))
            b1[j] = -np.angle(np.exp(1j * a0[j]) + np.exp(1j * (a1[nxt[j]] - theta)))
        current = objective()
        if current - previous < 1e-13:
            break
        previous = current
    return current


def verify_bound(
    n: int,
    k: int,
    alpha: float = 0.8,
    beta: float = 0.6,
    m: int = 1,
    restarts: int = 16,
    seed: int = 0,
    slack: float = 1e-9,
    reach: float = 1e-6,
) -> BoundCheck:
    """Search the strategy parameters directly and compare with the closed
    form: the ascent must neither beat the bound (beyond ``slack``) nor
    fall short of it (beyond ``reach``)."""
    bound = best_fidelity(n, k, alpha, beta, m)
    theta = 2 * math.pi * m / n
    rng = np.random.default_rng(seed)
    best_cos = -1.0
    for length in range(1, k + 1):
        for _ in range(restarts):
            best_cos = max(best_cos, _ascend_cycle(theta, length, rng))
    optimum = alpha**4 + beta**4 + 2 * (alpha * beta) ** 2 * best_cos
    confirmed = optimum <= bound.value + slack and optimum >= bound.value - reach
    return BoundCheck(
        bound=bound, optimum=optimum, confirmed=confirmed, slack=slack, reach=reach
    )
