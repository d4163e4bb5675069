"""Outsourcing protocol simulation: randomize, dispatch, validate, settle.

The client randomizes one instance ``k`` times with independent seeds and
sends each version to a different simulated provider (so no provider can
tell that two requests share an original).  Providers answer with a
solution vector, an unsatisfiable claim, or a failure; the client
derandomizes and validates every claimed solution against the original
instance it kept, cross-checks the verdicts, flags contradicted or
fraudulent providers, and settles a per-provider payment ledger.

Provider behaviors model the threat cases: ``honest`` solves the artifact
(backed by the exhaustive oracles — desk-scale instances only), ``lazy``
reports failure without working, ``malicious-unsat`` claims unsatisfiable
regardless of truth, ``malicious-corrupt`` solves honestly and then flips
three coordinates of the answer.

Validation never trusts a provider: a claimed solution must derandomize
to an assignment satisfying every original clause, and each
:class:`RandomizationRecord` carries a digest of the original instance so
a secret cannot be replayed against the wrong formula.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass

from .cnf import CnfInstance, InvalidSolutionError, ThreeCnfMap, TseitinMap, emit_dimacs, to_three_cnf
from .gf2 import BitMatrix
from .isomorph import IsoSecret, iso_derandomize, iso_randomize
from .matrixrand import (
    MatrixSecret,
    complete_solution,
    derandomize_solution,
    encode_linear,
    randomize_system,
)
from .objective import CostCircuitSecret, MincostSecret
from .oracles import brute_sat
from .solsetrand import GfSecret, gf_derandomize, gf_forward, gf_randomize

__all__ = [
    "DigestMismatchError",
    "RandomizationRecord",
    "ProviderAnswer",
    "ProviderBehavior",
    "ProviderReport",
    "OutsourceReport",
    "BEHAVIOR_KINDS",
    "instance_digest",
    "make_record",
    "validate_solution",
    "outsource",
    "render_report",
    "secret_to_obj",
    "secret_from_obj",
    "record_to_json",
    "record_from_json",
]

BEHAVIOR_KINDS = ("honest", "lazy", "malicious-unsat", "malicious-corrupt")


class DigestMismatchError(Exception):
    """The randomization record does not belong to this original instance."""


def instance_digest(instance: CnfInstance) -> str:
    return hashlib.sha256(emit_dimacs(instance).encode("ascii")).hexdigest()


@dataclass
class RandomizationRecord:
    """Client-held ticket for one outsourced instance: which method, its
    secret, and a digest binding it to the original."""

    method: str
    secret: object
    instance_digest: str
    seed: int


@dataclass
class ProviderAnswer:
    provider_id: int
    verdict: str  # "solution" | "unsatisfiable" | "fail"
    assignment: list[int] | None
    elapsed: float


@dataclass
class ProviderBehavior:
    kind: str

    def __post_init__(self):
        if self.kind not in BEHAVIOR_KINDS:
            raise ValueError(f"unknown behavior {self.kind!r}")


@dataclass
class ProviderReport:
    provider_id: int
    behavior: str
    verdict: str
    valid: bool | None
    flagged: bool
    payment: str
    elapsed: float


@dataclass
class OutsourceReport:
    verdict: str  # "sat" | "unsat-consensus" | "inconclusive"
    solution: dict[int, bool] | None
    providers: list[ProviderReport]
    records: list[RandomizationRecord]
    artifacts: list


def make_record(
    method: str, secret, original: CnfInstance, seed: int
) -> RandomizationRecord:
    return RandomizationRecord(method, secret, instance_digest(original), seed)


def _vector_to_assignment(vector: list[int], num_vars: int) -> dict[int, bool]:
    if len(vector) != num_vars:
        raise ValueError(
            f"solution has {len(vector)} coordinates, expected {num_vars}"
        )
    return {v: bool(vector[v - 1]) for v in range(1, num_vars + 1)}


def _derandomize(vector: list[int], record: RandomizationRecord, original: CnfInstance):
    """Map an artifact solution back to the original variables, raising
    :class:`InvalidSolutionError` if it does not check out."""
    secret = record.secret
    if record.method == "iso":
        assert isinstance(secret, IsoSecret)
        sol = _vector_to_assignment(vector, len(secret.permutation))
        assignment = iso_derandomize(sol, secret)
        if not original.satisfies(assignment):
            raise InvalidSolutionError(
                "derandomized assignment does not satisfy the original instance"
            )
        return assignment
    if record.method == "matrix":
        assert isinstance(secret, MatrixSecret)
        three, _ = to_three_cnf(original)
        x3 = derandomize_solution(list(vector), secret, three)
        return {v: x3[v] for v in range(1, original.num_vars + 1)}
    if record.method == "solution_set":
        assert isinstance(secret, GfSecret)
        three, _ = to_three_cnf(original)
        if len(vector) < secret.original_n:
            raise ValueError("solution is shorter than the variable block")
        y = {v: bool(vector[v - 1]) for v in range(1, secret.original_n + 1)}
        x3 = gf_derandomize(y, secret, three)
        return {v: x3[v] for v in range(1, original.num_vars + 1)}
    raise ValueError(
        f"records of method {record.method!r} are not validated against a bare CNF"
    )


def validate_solution(
    answer: ProviderAnswer, record: RandomizationRecord, original: CnfInstance
) -> tuple[bool, dict[int, bool] | None]:
    """Derandomize and check a claimed solution against the original.

    Returns ``(valid, assignment)``; any defect in the provider's vector —
    wrong length, unsatisfied clause after inversion — yields ``(False,
    None)`` rather than an exception, because provider misbehavior is data.
    A record whose digest does not match ``original`` raises
    :class:`DigestMismatchError`; an answer with no solution raises
    ValueError (caller bug, not provider behavior).
    """
    if answer.verdict != "solution":
        raise ValueError(f"answer verdict is {answer.verdict!r}, not a solution")
    if record.method not in ("iso", "matrix", "solution_set"):
        raise ValueError(
            f"records of method {record.method!r} are not validated against a "
            "bare CNF (use the objective-function derandomizer)"
        )
    if record.instance_digest != instance_digest(original):
        raise DigestMismatchError(
            "randomization record was made for a different instance"
        )
    if answer.assignment is None:
        return False, None
    try:
        assignment = _derandomize(answer.assignment, record, original)
    except (InvalidSolutionError, ValueError):
        return False, None
    return True, assignment


# ---------------------------------------------------------------------------
# Provider simulation
# ---------------------------------------------------------------------------

def _honest_answer(
    method: str, original: CnfInstance, artifact, secret, var_limit: int
) -> tuple[str, list[int] | None]:
    """What a truthful solver of the artifact would return.

    Backed by the exhaustive oracles; for the matrix and solution-set
    methods the satisfying vector is produced through the known forward
    maps (completion / ``Y = RX``), which yields exactly a solution of the
    artifact without enumerating its larger variable space.
    """
    if method == "iso":
        assert isinstance(artifact, CnfInstance)
        res = brute_sat(artifact, var_limit)
        if not res.satisfiable:
            return "unsatisfiable", None
        return "solution", [1 if res.assignment[v] else 0
                            for v in range(1, artifact.num_vars + 1)]
    three, _ = to_three_cnf(original)
    res = brute_sat(three, var_limit)
    if not res.satisfiable:
        return "unsatisfiable", None
    if method == "matrix":
        return "solution", complete_solution(three, res.assignment)
    assert method == "solution_set"
    full = gf_forward(res.assignment, secret, three)
    assert isinstance(artifact, CnfInstance)
    return "solution", [1 if full[v] else 0 for v in range(1, artifact.num_vars + 1)]


def _simulate_provider(
    behavior: str,
    method: str,
    original: CnfInstance,
    artifact,
    secret,
    rng: random.Random,
    var_limit: int,
) -> tuple[str, list[int] | None]:
    if behavior == "lazy":
        return "fail", None
    if behavior == "malicious-unsat":
        return "unsatisfiable", None
    verdict, vector = _honest_answer(method, original, artifact, secret, var_limit)
    if behavior == "malicious-corrupt" and verdict == "solution":
        vector = list(vector)
        for pos in rng.sample(range(len(vector)), min(3, len(vector))):
            vector[pos] ^= 1
    return verdict, vector


def _randomize_by_method(method: str, original: CnfInstance, seed: int):
    """Returns (artifact, secret); the artifact is what the provider sees."""
    if method == "iso":
        return iso_randomize(original, seed)
    if method == "matrix":
        three, _ = to_three_cnf(original)
        return randomize_system(encode_linear(three), seed)
    if method == "solution_set":
        three, _ = to_three_cnf(original)
        return gf_randomize(three, seed)
    raise ValueError(f"unknown method {method!r} (iso, matrix or solution_set)")


def outsource(
    instance: CnfInstance,
    method: str = "iso",
    k_providers: int = 3,
    behaviors: list[str] | None = None,
    seed: int = 0,
    var_limit: int = 24,
) -> OutsourceReport:
    """Run the whole protocol round against ``k_providers`` simulated
    providers and settle the outcome.

    Each provider receives an independently-seeded randomization of
    ``instance``.  Consolidation: the first validated solution makes the
    verdict ``"sat"``; with no valid solution, at least one unsatisfiable
    claim makes it ``"unsat-consensus"``; all-fail is ``"inconclusive"``.
    Flags mark providers whose unsat/fail claim is contradicted by a
    validated solution, and providers whose claimed solution failed
    validation.  Payment: full for providers whose answer supports the
    final verdict (validated solution, or unsatisfiable under consensus),
    nothing otherwise.
    """
    if k_providers < 1:
        raise ValueError("need at least one provider")
    if behaviors is None:
        behaviors = ["honest"] * k_providers
    behaviors = [b.kind if isinstance(b, ProviderBehavior) else b for b in behaviors]
    if len(behaviors) != k_providers:
        raise ValueError("one behavior per provider required")
    for b in behaviors:
        if b not in BEHAVIOR_KINDS:
            raise ValueError(f"unknown behavior {b!r}")

    master = random.Random(seed)
    seeds = [master.getrandbits(32) for _ in range(k_providers)]
    records, artifacts, answers = [], [], []
    for i in range(k_providers):
        artifact, secret = _randomize_by_method(method, instance, seeds[i])
        records.append(make_record(method, secret, instance, seeds[i]))
        artifacts.append(artifact)
        start = time.perf_counter()
        verdict, vector = _simulate_provider(
            behaviors[i], method, instance, artifact, secret,
            random.Random(seeds[i] ^ 0xC0FFEE), var_limit,
        )
        answers.append(
            ProviderAnswer(i, verdict, vector, time.perf_counter() - start)
        )

    validity: list[bool | None] = []
    assignments: list[dict[int, bool] | None] = []
    for answer, record in zip(answers, records):
        if answer.verdict == "solution":
            ok, assignment = validate_solution(answer, record, instance)
            validity.append(ok)
            assignments.append(assignment)
        else:
            validity.append(None)
            assignments.append(None)

    any_valid = any(v is True for v in validity)
    if any_valid:
        verdict = "sat"
        solution = next(a for v, a in zip(validity, assignments) if v)
    elif any(a.verdict == "unsatisfiable" for a in answers):
        verdict = "unsat-consensus"
        solution = None
    else:
        verdict = "inconclusive"
        solution = None

    providers = []
    for answer, behavior, valid in zip(answers, behaviors, validity):
        contradicted = any_valid and answer.verdict in ("unsatisfiable", "fail")
        fraudulent = valid is False
        if valid:
            payment = "paid-full"
        elif verdict == "unsat-consensus" and answer.verdict == "unsatisfiable":
            payment = "paid-full"
        else:
            payment = "paid-none"
        providers.append(
            ProviderReport(
                answer.provider_id, behavior, answer.verdict, valid,
                contradicted or fraudulent, payment, answer.elapsed,
            )
        )
    return OutsourceReport(verdict, solution, providers, records, artifacts)


def render_report(report: OutsourceReport) -> str:
    lines = [f"verdict: {report.verdict}"]
    if report.solution is not None:
        lits = " ".join(
            str(v if val else -v) for v, val in sorted(report.solution.items())
        )
        lines.append(f"solution: {lits}")
    for p in report.providers:
        valid = "-" if p.valid is None else ("yes" if p.valid else "NO")
        flag = " FLAGGED" if p.flagged else ""
        lines.append(
            f"provider {p.provider_id} [{p.behavior}]: verdict={p.verdict} "
            f"valid={valid} payment={p.payment} "
            f"elapsed={p.elapsed * 1000.0:.1f}ms{flag}"
        )
    flagged = sum(1 for p in report.providers if p.flagged)
    lines.append(f"flagged: {flagged} of {len(report.providers)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Secret / record serialization
# ---------------------------------------------------------------------------

def _matrix_obj(m: BitMatrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "bits": m.to_strings()}


def _matrix_from(obj: dict) -> BitMatrix:
    return BitMatrix.from_strings(obj["rows"], obj["cols"], obj["bits"])


def _tmap_obj(t: TseitinMap) -> dict:
    return {
        "num_input_vars": t.num_input_vars,
        "num_vars": t.num_vars,
        "gates": [[g, op, list(lits)] for g, (op, lits) in t.gates.items()],
    }


def _tmap_from(obj: dict) -> TseitinMap:
    gates = {g: (op, tuple(lits)) for g, op, lits in obj["gates"]}
    return TseitinMap(obj["num_input_vars"], obj["num_vars"], gates)


def _three_map_obj(t: ThreeCnfMap) -> dict:
    return {
        "original_num_vars": t.original_num_vars,
        "num_vars": t.num_vars,
        "definitions": [
            [v, d[0], list(d[1]) if len(d) > 1 else []]
            for v, d in t.definitions.items()
        ],
    }


def _three_map_from(obj: dict) -> ThreeCnfMap:
    defs: dict[int, tuple] = {}
    for v, kind, lits in obj["definitions"]:
        defs[v] = (kind,) if kind == "false" else (kind, tuple(lits))
    return ThreeCnfMap(obj["original_num_vars"], obj["num_vars"], defs)


def secret_to_obj(secret) -> dict:
    """JSON-ready dict for any secret type (tagged by ``type``)."""
    if isinstance(secret, IsoSecret):
        return {
            "type": "iso",
            "permutation": list(secret.permutation),
            "flips": sorted(secret.flips),
            "seed": secret.seed,
        }
    if isinstance(secret, MatrixSecret):
        return {
            "type": "matrix",
            "r": _matrix_obj(secret.r),
            "original_n": secret.original_n,
            "dummy_offset": secret.dummy_offset,
            "negation_constants": list(secret.negation_constants),
            "seed": secret.seed,
        }
    if isinstance(secret, GfSecret):
        return {
            "type": "gf2",
            "r": _matrix_obj(secret.r),
            "r_inv": _matrix_obj(secret.r_inv),
            "original_n": secret.original_n,
            "seed": secret.seed,
        }
    if isinstance(secret, MincostSecret):
        return {
            "type": "mincost",
            "method": secret.method,
            "circuit": {
                "output_bits": list(secret.circuit.output_bits),
                "width": secret.circuit.width,
                "beta": secret.circuit.beta,
                "adder_dummy_map": sorted(secret.circuit.adder_dummy_map),
                "tmap": _tmap_obj(secret.circuit.tmap),
            },
            "three_map": _three_map_obj(secret.three_map),
            "inner": secret_to_obj(secret.inner),
            "seed": secret.seed,
        }
    raise TypeError(f"cannot serialize secret of type {type(secret).__name__}")


def secret_from_obj(obj: dict):
    kind = obj.get("type")
    if kind == "iso":
        return IsoSecret(
            list(obj["permutation"]), frozenset(obj["flips"]), obj["seed"]
        )
    if kind == "matrix":
        return MatrixSecret(
            _matrix_from(obj["r"]),
            obj["original_n"],
            obj["dummy_offset"],
            list(obj["negation_constants"]),
            obj["seed"],
        )
    if kind == "gf2":
        return GfSecret(
            _matrix_from(obj["r"]),
            _matrix_from(obj["r_inv"]),
            obj["original_n"],
            obj["seed"],
        )
    if kind == "mincost":
        c = obj["circuit"]
        circuit = CostCircuitSecret(
            list(c["output_bits"]),
            c["width"],
            c["beta"],
            frozenset(c["adder_dummy_map"]),
            _tmap_from(c["tmap"]),
        )
        return MincostSecret(
            obj["method"],
            circuit,
            _three_map_from(obj["three_map"]),
            secret_from_obj(obj["inner"]),
            obj["seed"],
        )
    raise ValueError(f"unknown secret type {kind!r}")


def record_to_json(record: RandomizationRecord) -> str:
    obj = {
        "method": record.method,
        "secret": secret_to_obj(record.secret),
        "instance_digest": record.instance_digest,
        "seed": record.seed,
    }
    return json.dumps(obj, indent=1) + "\n"


def record_from_json(text: str) -> RandomizationRecord:
    obj = json.loads(text)
    return RandomizationRecord(
        obj["method"],
        secret_from_obj(obj["secret"]),
        obj["instance_digest"],
        obj["seed"],
    )
