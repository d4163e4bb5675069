"""Objective-function randomization: Mincost SAT and MAX3SAT.

A Mincost instance (CNF plus per-variable non-negative integer costs)
leaks structure through its cost vector: the provider can see which
variables carry weight.  The fix is to compile the cost function into the
formula itself — an adder circuit summing ``c_i * x_i`` in binary — so
that after CNF-level randomization the cost function mentions only the
``w`` circuit output bits, with fixed weights ``2^(w-j)``.  Dummy and
original variables then look alike.

MAX3SAT reduces to Mincost by a per-clause miss indicator: a fresh
variable forced (by a Tseitin biconditional) to be true exactly when its
clause is violated, at cost 1.  The original clauses are dropped from the
hard constraint set — only the indicator definitions are hard — so the
optimum is ``m - mincost`` with ``m`` the clause count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cnf import (
    FALSE,
    CnfInstance,
    InvalidSolutionError,
    ThreeCnfMap,
    TseitinEncoder,
    TseitinMap,
    evaluate_gates,
    f_and,
    f_or,
    f_var,
    f_xor,
    to_three_cnf,
)
from .matrixrand import LinearSystem, MatrixSecret, encode_linear, randomize_system
from .solsetrand import GfSecret, gf_derandomize, gf_randomize

__all__ = [
    "MincostInstance",
    "Max3SatInstance",
    "CostCircuitSecret",
    "RandomizedMincost",
    "MincostSecret",
    "compile_cost_circuit",
    "circuit_costs",
    "decode_cost",
    "evaluate_circuit",
    "randomize_mincost",
    "derandomize_mincost",
    "max3sat_to_mincost",
    "emit_cost_sidecar",
    "parse_cost_sidecar",
]


@dataclass
class MincostInstance:
    """A CNF with a linear objective: minimize ``sum(costs[v] * x_v)`` over
    satisfying assignments.  Variables absent from ``costs`` cost 0."""

    cnf: CnfInstance
    costs: dict[int, int] = field(default_factory=dict)

    def validate(self) -> None:
        self.cnf.validate()
        for v, c in self.costs.items():
            if not 1 <= v <= self.cnf.num_vars:
                raise ValueError(f"cost on unknown variable {v}")
            if c < 0:
                raise ValueError(f"negative cost {c} on variable {v}")

    def cost_of(self, assignment: dict[int, bool]) -> int:
        return sum(c for v, c in self.costs.items() if assignment[v])


@dataclass
class Max3SatInstance:
    """Clauses to maximize; every clause must have exactly three literals
    (pad shorter ones with :func:`satcloak.cnf.to_three_cnf` first)."""

    cnf: CnfInstance

    def validate(self) -> None:
        self.cnf.validate()
        for i, clause in enumerate(self.cnf.clauses):
            if len(clause) != 3:
                raise ValueError(f"clause {i + 1} has width {len(clause)}, not 3")


@dataclass
class CostCircuitSecret:
    """Layout of a compiled cost circuit.

    ``output_bits`` are the variables ``b_1..b_w`` holding the binary cost,
    most significant first (positions may share a variable when the adder
    proves bits equal, e.g. constant-zero high bits).  ``adder_dummy_map``
    is the set of circuit-internal gate variables other than the outputs.
    ``tmap`` holds every gate definition and is what forward evaluation
    and solution validation run on.
    """

    output_bits: list[int]
    width: int
    beta: int
    adder_dummy_map: frozenset[int]
    tmap: TseitinMap


def _ripple_add(xs: list, ys: list) -> list:
    """Add two equal-width little-endian formula vectors; the final carry is
    dropped (callers guarantee the sum fits the width)."""
    out = []
    carry = FALSE
    for a, b in zip(xs, ys):
        half = f_xor(a, b)
        out.append(f_xor(half, carry))
        carry = f_or(f_and(a, b), f_and(carry, half))
    return out


def compile_cost_circuit(
    inst: MincostInstance, beta: int | None = None
) -> tuple[CnfInstance, CostCircuitSecret]:
    """Compile the cost function into the CNF as a binary adder tree.

    Returns the combined instance (original clauses plus gate definition
    clauses) and the circuit secret.  In every satisfying assignment the
    output bits spell ``sum(costs[v] * x_v)`` in binary, most significant
    bit first, over ``w = beta + ceil(log2(n))`` bits.

    ``beta`` is the per-cost bit width; by default the smallest width that
    fits every cost.  A cost of ``2^beta`` or more raises ValueError.
    """
    inst.validate()
    n = inst.cnf.num_vars
    if beta is None:
        beta = max((c.bit_length() for c in inst.costs.values()), default=1)
        beta = max(beta, 1)
    if beta < 1:
        raise ValueError("beta must be at least 1")
    for v, c in inst.costs.items():
        if c >= 1 << beta:
            raise ValueError(
                f"cost {c} on variable {v} exceeds 2^{beta} - 1; raise beta"
            )
    width = beta + (max(n, 1) - 1).bit_length()  # beta + ceil(log2 n)

    enc = TseitinEncoder(n)
    vectors = []
    for v in sorted(inst.costs):
        c = inst.costs[v]
        if c == 0:
            continue
        vectors.append(
            [f_var(v) if (c >> i) & 1 else FALSE for i in range(width)]
        )
    while len(vectors) > 1:
        nxt = [
            _ripple_add(vectors[i], vectors[i + 1])
            for i in range(0, len(vectors) - 1, 2)
        ]
        if len(vectors) % 2:
            nxt.append(vectors[-1])
        vectors = nxt
    total = vectors[0] if vectors else [FALSE] * width
    # Most significant first, each output materialized as a real variable.
    output_bits = [enc.materialize(enc.encode(f)) for f in reversed(total)]
    combined = CnfInstance(
        enc.num_vars, [list(c) for c in inst.cnf.clauses] + enc.clauses
    )
    internals = frozenset(enc.gates) - frozenset(output_bits)
    secret = CostCircuitSecret(output_bits, width, beta, internals, enc.mapping())
    return combined, secret


def circuit_costs(secret: CostCircuitSecret) -> dict[int, int]:
    """Cost function of the compiled instance: weight ``2^(w-j)`` on output
    bit ``b_j``.  Weights of positions sharing a variable accumulate."""
    costs: dict[int, int] = {}
    for j, b in enumerate(secret.output_bits, start=1):
        costs[b] = costs.get(b, 0) + (1 << (secret.width - j))
    return costs


def decode_cost(assignment: dict[int, bool], secret: CostCircuitSecret) -> int:
    """Read the binary cost off the output bits of a total assignment."""
    value = 0
    for j, b in enumerate(secret.output_bits, start=1):
        if assignment[b]:
            value += 1 << (secret.width - j)
    return value


def evaluate_circuit(
    secret: CostCircuitSecret, inputs: dict[int, bool]
) -> dict[int, bool]:
    """Extend an assignment of the original variables over all gates."""
    return evaluate_gates(secret.tmap, inputs)


@dataclass
class RandomizedMincost:
    """The artifact a provider sees: either a linear system (``kind ==
    "linear"``) or a 3CNF (``kind == "cnf"``), plus the cost function over
    output-bit variables."""

    kind: str
    system: LinearSystem | None
    cnf: CnfInstance | None
    costs: dict[int, int]


@dataclass
class MincostSecret:
    """Composite client-held state: circuit layout, 3CNF conversion map,
    and the inner randomizer's secret."""

    method: str
    circuit: CostCircuitSecret
    three_map: ThreeCnfMap
    inner: MatrixSecret | GfSecret
    seed: int


def randomize_mincost(
    inst: MincostInstance,
    seed: int,
    method: str = "matrix",
    beta: int | None = None,
    row_weight: int | None = None,
) -> tuple[RandomizedMincost, MincostSecret]:
    """Randomize a Mincost instance so dummies and originals are
    indistinguishable.

    Pipeline: compile the cost circuit, convert to exactly-3CNF, then hand
    off to the chosen CNF randomizer — ``"matrix"`` (random-matrix
    multiplication of the linear encoding) or ``"solution_set"`` (GF(2)
    change of variables; circuit output bits are held fixed so the cost
    function still addresses them).  Every satisfying assignment of the
    result carries the original cost on its output bits.
    """
    combined, circuit = compile_cost_circuit(inst, beta)
    three, three_map = to_three_cnf(combined)
    out_costs = circuit_costs(circuit)
    if method == "matrix":
        rsys, inner = randomize_system(encode_linear(three), seed)
        artifact = RandomizedMincost("linear", rsys, None, out_costs)
    elif method == "solution_set":
        out_cnf, inner = gf_randomize(
            three, seed, row_weight=row_weight,
            fixed_vars=frozenset(circuit.output_bits),
        )
        artifact = RandomizedMincost("cnf", None, out_cnf, out_costs)
    else:
        raise ValueError(f"unknown method {method!r} (matrix or solution_set)")
    return artifact, MincostSecret(method, circuit, three_map, inner, seed)


def _as_assignment(sol, num_vars: int) -> dict[int, bool]:
    if isinstance(sol, dict):
        missing = [v for v in range(1, num_vars + 1) if v not in sol]
        if missing:
            raise ValueError(f"solution is missing variable {missing[0]}")
        return {v: bool(sol[v]) for v in range(1, num_vars + 1)}
    if len(sol) < num_vars:
        raise ValueError(
            f"solution has {len(sol)} coordinates, expected at least {num_vars}"
        )
    return {v: bool(sol[v - 1]) for v in range(1, num_vars + 1)}


def derandomize_mincost(
    sol, secret: MincostSecret, original: MincostInstance
) -> tuple[dict[int, bool], int]:
    """Recover the original assignment and its cost from a provider answer.

    ``sol`` is a 0/1 vector or assignment dict over the randomized
    instance's variables.  Validation is two-stage: the recovered original
    variables must satisfy the original CNF, and the provider's circuit
    bits (cost outputs included) must agree with a forward re-evaluation of
    the circuit — so a forged cheap cost is caught, not just an
    unsatisfying assignment.  Raises :class:`InvalidSolutionError` on
    either failure.
    """
    inner = secret.inner
    if secret.method == "matrix":
        assert isinstance(inner, MatrixSecret)
        expected = inner.original_n + 2 * len(inner.negation_constants)
        if not isinstance(sol, dict) and len(sol) != expected:
            raise ValueError(
                f"solution has {len(sol)} coordinates, expected {expected}"
            )
        x3 = _as_assignment(sol, inner.original_n)
    else:
        assert isinstance(inner, GfSecret)
        y = _as_assignment(sol, inner.original_n)
        x3 = gf_derandomize(y, inner)
    # Restrict 3CNF variables to the compiled circuit's, then split into
    # original inputs vs. circuit gates.
    tmap = secret.circuit.tmap
    claimed = {v: x3[v] for v in range(1, tmap.num_vars + 1)}
    x = {v: claimed[v] for v in range(1, tmap.num_input_vars + 1)}
    if not original.cnf.satisfies(x):
        raise InvalidSolutionError(
            "recovered assignment does not satisfy the original instance"
        )
    recomputed = evaluate_gates(tmap, x)
    if recomputed != claimed:
        raise InvalidSolutionError(
            "solution's circuit bits are inconsistent with its inputs"
        )
    return x, decode_cost(claimed, secret.circuit)


def max3sat_to_mincost(inst: Max3SatInstance) -> tuple[MincostInstance, int]:
    """Reduce MAX3SAT to Mincost via per-clause miss indicators.

    Clause ``i`` gets a fresh variable ``u_i`` with hard clauses forcing
    ``u_i`` true exactly when clause ``i`` is violated, at cost 1.  The
    original clauses themselves are NOT hard (they may be violated); the
    returned offset is the clause count ``m``, and the input's maximum
    satisfiable count equals ``m - mincost``.
    """
    inst.validate()
    cnf = inst.cnf
    n = cnf.num_vars
    clauses: list[list[int]] = []
    costs: dict[int, int] = {}
    for i, clause in enumerate(cnf.clauses):
        u = n + i + 1
        for lit in clause:
            clauses.append([-u, -lit])
        clauses.append([u, *clause])
        costs[u] = 1
    reduced = MincostInstance(CnfInstance(n + cnf.num_clauses, clauses), costs)
    return reduced, cnf.num_clauses


def emit_cost_sidecar(costs: dict[int, int]) -> str:
    """Serialize a cost function: one ``w <var> <cost>`` line per weighted
    variable, sorted by variable."""
    return "".join(f"w {v} {costs[v]}\n" for v in sorted(costs))


def parse_cost_sidecar(text: str) -> dict[int, int]:
    """Parse the ``w <var> <cost>`` sidecar format (blank and ``c`` comment
    lines ignored)."""
    costs: dict[int, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "w":
            raise ValueError(f"line {lineno}: expected 'w <var> <cost>', got {line!r}")
        try:
            v, c = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-integer field in {line!r}") from exc
        if v < 1 or c < 0:
            raise ValueError(f"line {lineno}: bad variable or negative cost")
        if v in costs:
            raise ValueError(f"line {lineno}: duplicate cost for variable {v}")
        costs[v] = c
    return costs
