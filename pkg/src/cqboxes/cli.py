"""Command-line driver: verify boxes, synthesise the library's families
against their analytic targets, compute approximation frontiers, and
probe the three-party phase theorem.

Reports go to stdout as JSON with sorted keys, so a command is
byte-identical across runs given the same flags and seed; timing goes to
stderr.  Exit codes: 0 success, 1 a check failed (signalling found,
distance above tolerance, bound not confirmed), 2 bad usage or malformed
input, 3 finished with a budget warning.
"""
from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from cqboxes.bounds import best_fidelity, verify_bound
from cqboxes.boxes import (
    CCBox,
    CQBox,
    cc_no_signalling,
    cq_box_distance,
    cq_no_signalling,
    mix_boxes,
)
from cqboxes.io import BoxDocumentError, load_box, save_box
from cqboxes.multipartite import (
    PhaseAssignment,
    ghz_phase_box,
    ghz_phase_strategy,
    is_local_equivalent,
    w_phase_box,
    w_phase_theorem_check,
)
from cqboxes.quantum import PartyStructure, StateVector, TOLERANCE, bell_state, haar_unitary
from cqboxes.synthesis import (
    bit_flip_strategy,
    eight_output_strategy,
    eight_output_targets,
    general_pure_strategy,
    irrational_phase_strategy,
    max_entangled_strategy,
    mixed_disordered_strategy,
    nonmax_pure_strategy,
    phase_family_box,
    rational_phase_strategy,
    sign_flip_strategy,
    simulate,
    unitary_family_box,
)

MAX_WITNESSES = 10
BOUND_ALPHABET_CAP = 4


def _digest(record: dict, files: tuple[str, ...] = ()) -> str:
    """Short content hash over the command's parameters and input files."""
    h = hashlib.sha256(json.dumps(record, sort_keys=True).encode())
    for path in files:
        h.update(Path(path).read_bytes())
    return h.hexdigest()[:16]


def _witness_entry(witness) -> dict:
    return {
        "subgroup": list(witness.subgroup),
        "subgroup_inputs": list(witness.subgroup_inputs),
        "outside_inputs": [list(w) for w in witness.outside_inputs],
        "violation": witness.violation,
    }


def _verify_report(box, tol: float) -> tuple[dict, bool]:
    if isinstance(box, CCBox):
        kind, report = "cc", cc_no_signalling(box, tol=tol)
    else:
        kind, report = "cq", cq_no_signalling(box, tol=tol)
    worst = sorted(report.witnesses, key=lambda w: -w.violation)[:MAX_WITNESSES]
    return (
        {
            "kind": kind,
            "tolerance": report.tolerance,
            "passed": report.passed,
            "worst_violation": report.worst_violation,
            "witnesses": [_witness_entry(w) for w in worst],
        },
        report.passed,
    )


def _cmd_verify(args) -> tuple[dict, int]:
    box = load_box(args.box)
    actual = "cc" if isinstance(box, CCBox) else "cq"
    if args.kind and args.kind != actual:
        raise ValueError(f"document is kind '{actual}', expected '{args.kind}'")
    body, passed = _verify_report(box, args.tol)
    report = {
        "command": "verify",
        "input": args.box,
        "digest": _digest({"tol": args.tol}, (args.box,)),
        **body,
    }
    return report, 0 if passed else 1


def _parse_weights(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise ValueError(f"--weights must be comma-separated numbers, got '{text}'") from exc


def _parse_phases(text: str) -> dict[tuple[int, int, int], Fraction]:
    try:
        raw = json.loads(text)
        assert isinstance(raw, dict)
    except (json.JSONDecodeError, AssertionError) as exc:
        raise ValueError(
            "--phases must be a JSON object like {\"1,1,0\": \"1/4\"}"
        ) from exc
    phases = {}
    for key, value in raw.items():
        try:
            parts = tuple(int(v) for v in key.split(","))
            fraction = Fraction(str(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad phase entry '{key}': {value!r}") from exc
        if len(parts) != 3:
            raise ValueError(f"phase key '{key}' must be 'x,y,level'")
        phases[parts] = fraction
    return phases


def _nonmax_target(weights: list[float], phases: dict) -> CQBox:
    levels = len(weights)
    structure = PartyStructure.pair(levels)
    states = {}
    for x, y in itertools.product(range(2), range(2)):
        diag = [
            math.sqrt(w) * np.exp(2j * math.pi * float(phases.get((x, y, i), 0)))
            for i, w in enumerate(weights)
        ]
        states[(x, y)] = StateVector(np.diag(diag).reshape(-1), structure)
    return CQBox.from_pure((2, 2), states)


def _load_cq_target(path: str | None, context: str) -> CQBox:
    if not path:
        raise ValueError(f"{context} requires --target")
    box = load_box(path)
    if not isinstance(box, CQBox):
        raise ValueError(f"{context} needs a quantum-output target box")
    return box


def _unitaries_from_box(box: CQBox) -> tuple[dict, int]:
    """Read off T with |psi> = (T x 1)|phi+_n| for each input, rejecting
    outputs that are not maximally entangled."""
    dims = box.structure.dims
    if len(dims) != 2 or dims[0] != dims[1]:
        raise ValueError("max-entangled targets need two parties of equal dimension")
    n = dims[0]
    targets = {}
    for key in box.inputs:
        mat = math.sqrt(n) * box.pure_output(key).amplitudes.reshape(n, n)
        if np.max(np.abs(mat @ mat.conj().T - np.eye(n))) > 1e-6:
            raise ValueError(f"output at {key} is not maximally entangled")
        targets[key] = mat
    return targets, n


def _build_synth(args) -> dict:
    """Strategy, analytic target, distance tolerance and report extras
    for one construction."""
    name = args.construction
    built: dict = {"tolerance": 1e-9, "parameters": {}, "certificate": None, "files": ()}
    if name == "bit-flip":
        built["strategy"] = bit_flip_strategy()
        built["target"] = CQBox.from_pure(
            (2, 2),
            {
                (x, y): bell_state(x * y)
                for x, y in itertools.product(range(2), range(2))
            },
        )
    elif name == "sign-flip":
        built["strategy"] = sign_flip_strategy(args.alpha, args.beta)
        built["target"] = phase_family_box(
            lambda x, y: math.pi * x * y, args.alpha, args.beta
        )
        built["parameters"] = {"alpha": args.alpha, "beta": args.beta}
    elif name == "phase":
        built["strategy"] = rational_phase_strategy(args.m, args.n, args.alpha, args.beta)
        built["target"] = phase_family_box(
            lambda x, y: 2 * math.pi * args.m * x * y / args.n, args.alpha, args.beta
        )
        built["parameters"] = {
            "m": args.m, "n": args.n, "alpha": args.alpha, "beta": args.beta,
        }
    elif name == "irrational-phase":
        strategy, bound = irrational_phase_strategy(
            args.theta, args.n, args.alpha, args.beta
        )
        built["strategy"] = strategy
        built["target"] = phase_family_box(
            lambda x, y: 2 * math.pi * args.theta * x * y, args.alpha, args.beta
        )
        # bound limits the infidelity; for pure states the trace distance
        # is sqrt(1 - fidelity)
        built["tolerance"] = min(1.0, math.sqrt(bound))
        built["parameters"] = {
            "theta": args.theta, "n": args.n, "alpha": args.alpha, "beta": args.beta,
        }
        built["certificate"] = {
            "error_bound": bound,
            "numerator": round(args.n * args.theta),
            "denominator": args.n,
        }
    elif name == "max-entangled":
        if args.target:
            target_box = _load_cq_target(args.target, name)
            targets, n = _unitaries_from_box(target_box)
            built["parameters"] = {"target": args.target}
            built["files"] = (args.target,)
        else:
            n = args.n
            rng = np.random.default_rng(args.seed)
            targets = {
                key: haar_unitary(n, rng).matrix
                for key in itertools.product(range(2), range(2))
            }
            target_box = unitary_family_box(targets, n)
            built["parameters"] = {"n": n}
        built["strategy"] = max_entangled_strategy(
            targets, n, target_box.input_sizes
        )
        built["target"] = target_box
    elif name == "eight-output":
        strategy = eight_output_strategy()
        built["strategy"] = strategy
        built["target"] = unitary_family_box(eight_output_targets(), 2, (2, 3))
        built["certificate"] = {
            "pairings": {
                ",".join(map(str, key)): bijection.tolist()
                for key, bijection in sorted(strategy.ccbox.bijections.items())
            }
        }
    elif name == "nonmax-pure":
        weights = _parse_weights(args.weights)
        phases = _parse_phases(args.phases)
        built["strategy"] = nonmax_pure_strategy(weights, phases)
        built["target"] = _nonmax_target(weights, phases)
        built["parameters"] = {
            "weights": weights,
            "phases": {",".join(map(str, k)): str(v) for k, v in sorted(phases.items())},
        }
    elif name == "general-pure":
        target_box = _load_cq_target(args.target, name)
        built["strategy"] = general_pure_strategy(target_box)
        built["target"] = target_box
        built["parameters"] = {"target": args.target}
        built["files"] = (args.target,)
    elif name == "mixed-disordered":
        target_box = _load_cq_target(args.target, name)
        schedule, strategies = mixed_disordered_strategy(target_box)
        built["strategy"] = (schedule, strategies)
        built["target"] = target_box
        built["tolerance"] = 1e-8
        built["parameters"] = {"target": args.target}
        built["files"] = (args.target,)
        built["certificate"] = {
            "intervals": len(schedule.intervals),
            "interval_weights": list(schedule.weights),
        }
    elif name == "ghz-phase":
        built["strategy"] = ghz_phase_strategy(args.m, args.n)
        built["target"] = ghz_phase_box(2 * math.pi * args.m / args.n)
        built["parameters"] = {"m": args.m, "n": args.n}
    else:
        raise ValueError(f"unknown construction '{name}'")
    return built


def _cmd_synth(args) -> tuple[dict, int]:
    built = _build_synth(args)
    strategy = built["strategy"]
    if isinstance(strategy, tuple):  # mixed-disordered: one strategy per interval
        schedule, strategies = strategy
        box = mix_boxes(
            [
                (weight, simulate(item, samples=args.samples, seed=args.seed + i))
                for i, (weight, item) in enumerate(zip(schedule.weights, strategies))
            ]
        )
    else:
        box = simulate(strategy, samples=args.samples, seed=args.seed)
    distance = cq_box_distance(box, built["target"])
    body, ns_passed = _verify_report(box, args.tol)
    record = {
        "construction": args.construction,
        "parameters": built["parameters"],
        "samples": args.samples,
        "seed": args.seed,
    }
    report = {
        "command": "synth",
        **record,
        "digest": _digest(record, built["files"]),
        "target_distance": distance,
        "distance_tolerance": built["tolerance"],
        **body,
    }
    if built["certificate"] is not None:
        report["certificate"] = built["certificate"]
    metadata = {"label": f"synth-{args.construction}", "seed": args.seed, "tolerance": args.tol}
    if args.out:
        save_box(box, args.out, metadata)
        report["output"] = args.out
    if args.target_out:
        save_box(built["target"], args.target_out, metadata)
        report["target_output"] = args.target_out
    passed = ns_passed and distance <= built["tolerance"]
    return report, 0 if passed else 1


def _cmd_bound(args) -> tuple[dict, int]:
    if args.n > BOUND_ALPHABET_CAP:
        raise ValueError(
            f"phase denominators above {BOUND_ALPHABET_CAP} are refused (enumeration cap)"
        )
    kmax = args.kmax if args.kmax is not None else args.n
    if kmax < 1:
        raise ValueError("--kmax must be at least 1")
    record = {
        "n": args.n, "kmax": kmax, "m": args.m,
        "alpha": args.alpha, "beta": args.beta,
        "budget": args.budget, "restarts": args.restarts, "seed": args.seed,
    }
    frontier = []
    remaining = args.budget
    exceeded = False
    failed = False
    for k in range(1, kmax + 1):
        result = best_fidelity(args.n, k, args.alpha, args.beta, args.m)
        row = {
            "k": k,
            "value": result.value,
            "delta": result.delta,
            "cycle_length": result.cycle_length,
        }
        if remaining >= args.restarts:
            remaining -= args.restarts
            check = verify_bound(
                args.n, k, args.alpha, args.beta, args.m,
                restarts=args.restarts, seed=args.seed,
            )
            row["optimum"] = check.optimum
            row["confirmed"] = check.confirmed
            if not check.confirmed:
                failed = True
        else:
            exceeded = True
            row["confirmed"] = None
        frontier.append(row)
    report = {
        "command": "bound",
        **record,
        "digest": _digest(record),
        "frontier": frontier,
        "budget_exceeded": exceeded,
    }
    if kmax >= args.n:
        exact = frontier[args.n - 1]["value"] >= 1 - 1e-9
        report["full_alphabet_exact"] = exact
        if not exact:
            failed = True
    code = 1 if failed else 3 if exceeded else 0
    return report, code


def _load_assignment(path: str) -> PhaseAssignment:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read assignment '{path}': {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"'{path}' is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not {"alpha", "beta", "gamma"} <= set(doc):
        raise ValueError("assignment must be an object with 'alpha', 'beta', 'gamma'")
    return PhaseAssignment(
        np.asarray(doc["alpha"], dtype=float),
        np.asarray(doc["beta"], dtype=float),
        np.asarray(doc["gamma"], dtype=float),
    )


def _cmd_wphase(args) -> tuple[dict, int]:
    if args.mode == "single":
        if not args.assignment:
            raise ValueError("single mode requires an assignment file")
        assignment = _load_assignment(args.assignment)
        body, passed = _verify_report(w_phase_box(assignment), args.tol)
        decomposition = is_local_equivalent(assignment, args.tol)
        report = {
            "command": "wphase",
            "mode": "single",
            "input": args.assignment,
            "digest": _digest({"tol": args.tol}, (args.assignment,)),
            **body,
            "decomposition": None
            if decomposition is None
            else {
                "a": decomposition.a.tolist(),
                "b": decomposition.b.tolist(),
                "c": decomposition.c.tolist(),
            },
        }
        return report, 0 if passed else 1

    if args.assignment:
        raise ValueError("theorem mode takes no assignment file")
    grid = [float(v) for v in args.grid.split(",")] if args.grid else None
    record = {
        "grid": grid, "random_samples": args.random_samples,
        "seed": args.seed, "tol": args.tol,
    }
    kwargs = {"random_samples": args.random_samples, "seed": args.seed, "tol": args.tol}
    if grid is not None:
        kwargs["grid_values"] = grid
    result = w_phase_theorem_check(**kwargs)
    report = {
        "command": "wphase",
        "mode": "theorem",
        "seed": args.seed,
        "digest": _digest(record),
        "local_cases": result.local_cases,
        "local_all_non_signalling": result.local_all_non_signalling,
        "local_all_decomposable": result.local_all_decomposable,
        "perturbed_cases": result.perturbed_cases,
        "perturbed_all_signalling": result.perturbed_all_signalling,
        "perturbed_none_decomposable": result.perturbed_none_decomposable,
        "worst_violation_mismatch": result.worst_violation_mismatch,
        "random_cases": result.random_cases,
        "random_equivalence_holds": result.random_equivalence_holds,
        "equivalence_holds": result.equivalence_holds,
    }
    return report, 0 if result.equivalence_holds else 1


def _add_globals(parser: argparse.ArgumentParser, defaults: bool) -> None:
    """Global flags, valid both before and after the subcommand."""
    suppress = argparse.SUPPRESS
    parser.add_argument(
        "--tol", type=float, default=TOLERANCE if defaults else suppress,
        help="numerical tolerance",
    )
    parser.add_argument(
        "--seed", type=int, default=0 if defaults else suppress, help="random seed"
    )
    parser.add_argument(
        "--threads", type=int, default=1 if defaults else suppress,
        help="worker threads (accepted for compatibility; execution is sequential)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqboxes",
        description="Simulate and verify classical-input quantum-output boxes.",
    )
    _add_globals(parser, defaults=True)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, defaults=False)
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser(
        "verify", parents=[common], help="no-signalling check for a box document"
    )
    verify.add_argument("box", help="path to a box JSON document")
    verify.add_argument("--kind", choices=("cc", "cq"), help="require this document kind")

    synth = sub.add_parser(
        "synth", parents=[common], help="synthesise a family and compare it to its analytic target"
    )
    synth.add_argument(
        "construction",
        choices=[
            "bit-flip",
            "sign-flip",
            "phase",
            "irrational-phase",
            "max-entangled",
            "eight-output",
            "nonmax-pure",
            "general-pure",
            "mixed-disordered",
            "ghz-phase",
        ],
    )
    synth.add_argument("--alpha", type=float, default=1 / math.sqrt(2))
    synth.add_argument("--beta", type=float, default=1 / math.sqrt(2))
    synth.add_argument("--m", type=int, default=1, help="phase numerator")
    synth.add_argument("--n", type=int, default=2, help="phase denominator / local dimension")
    synth.add_argument("--theta", type=float, default=0.5, help="phase in turns of 2 pi")
    synth.add_argument("--weights", default="0.8,0.2", help="comma-separated level weights")
    synth.add_argument(
        "--phases", default="{}", help='JSON object of exact phases, e.g. {"1,1,0": "1/4"}'
    )
    synth.add_argument(
        "--target", help="target box document (max-entangled, general-pure, mixed-disordered)"
    )
    synth.add_argument("--samples", type=int, default=1000, help="samples for coupling strategies")
    synth.add_argument("--out", help="write the synthesised box document here")
    synth.add_argument("--target-out", help="write the analytic target box document here")

    bound = sub.add_parser(
        "bound", parents=[common], help="best-fidelity frontier for restricted output alphabets"
    )
    bound.add_argument("--n", type=int, required=True, help="phase denominator (at most 4)")
    bound.add_argument("--kmax", type=int, help="largest alphabet in the frontier (default n)")
    bound.add_argument("--m", type=int, default=1, help="phase numerator")
    bound.add_argument("--alpha", type=float, default=0.8)
    bound.add_argument("--beta", type=float, default=0.6)
    bound.add_argument(
        "--budget", type=int, default=64,
        help="total ascent restarts available for confirmations",
    )
    bound.add_argument("--restarts", type=int, default=16, help="ascent restarts per row")

    wphase = sub.add_parser("wphase", parents=[common], help="probe the three-party phase locality theorem")
    wphase.add_argument(
        "--mode", choices=("theorem", "single"), default="theorem",
        help="sweep the whole theorem or test one assignment file",
    )
    wphase.add_argument("assignment", nargs="?", help="phase assignment JSON (single mode)")
    wphase.add_argument("--grid", help="comma-separated per-party phase grid values")
    wphase.add_argument("--random-samples", type=int, default=40)

    return parser


_HANDLERS = {
    "verify": _cmd_verify,
    "synth": _cmd_synth,
    "bound": _cmd_bound,
    "wphase": _cmd_wphase,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            parser.error("--threads must be at least 1")
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.monotonic()
    try:
        report, code = _HANDLERS[args.command](args)
    except (BoxDocumentError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(report, indent=2, sort_keys=True))
    print(f"elapsed {time.monotonic() - started:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
