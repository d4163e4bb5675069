"""Linear-system randomization of 3SAT instances.

Each width-3 clause becomes one integer equation over the clause's three
variables plus two fresh dummy variables:

    y'_1 + y'_2 + y'_3 + d_1 + d_2 = 3

where a positive literal contributes ``+y``, a negated literal contributes
``-y`` with the constant folded into the right-hand side (a clause with
``t`` negations has rhs ``3 - t``).  Stacking the ``m`` equations gives
``AX = B`` with ``A`` an ``m x (n + 2m)`` matrix; multiplying both sides by
a random full-rank 0/1 matrix ``R`` (ordinary integer arithmetic) yields the
outsourced system ``RAX = RB``, whose 0/1 solution set is identical because
``R`` is invertible.  Solutions map back by projecting the first ``n``
coordinates.

The outsourced artifact serializes as an OPB pseudo-Boolean file.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .cnf import CnfInstance, InvalidSolutionError
from .gf2 import BitMatrix, int_mat_mul, int_mat_vec, random_full_rank

__all__ = [
    "LinearSystem",
    "MatrixSecret",
    "encode_linear",
    "dummy_completion",
    "complete_solution",
    "apply_random_matrix",
    "randomize_system",
    "derandomize_solution",
    "check_linear",
    "emit_opb",
    "parse_opb",
]


@dataclass
class LinearSystem:
    """0/1 linear equality system: ``coeffs[i] . x = rhs[i]`` for each row."""

    num_vars: int
    coeffs: list[list[int]]
    rhs: list[int]

    @property
    def num_constraints(self) -> int:
        return len(self.coeffs)

    def validate(self) -> None:
        if len(self.rhs) != len(self.coeffs):
            raise ValueError("rhs length does not match constraint count")
        for row in self.coeffs:
            if len(row) != self.num_vars:
                raise ValueError("coefficient row width mismatch")


@dataclass
class MatrixSecret:
    """Client-held state for inverting the randomization: the matrix ``R``,
    where the original variables end (``original_n``, also the dummy
    offset), and the per-row negation counts that fix the rhs constants."""

    r: BitMatrix
    original_n: int
    dummy_offset: int
    negation_constants: list[int]
    seed: int


def encode_linear(instance: CnfInstance) -> LinearSystem:
    """Encode an exactly-3CNF instance as ``AX = B``.

    One equation per clause over ``n + 2m`` variables; the two dummies of
    clause ``i`` occupy columns ``n + 2i`` and ``n + 2i + 1`` (0-based).
    Raises ValueError on clauses that are not width 3.
    """
    n = instance.num_vars
    m = instance.num_clauses
    num_vars = n + 2 * m
    coeffs = []
    rhs = []
    for i, clause in enumerate(instance.clauses):
        if len(clause) != 3:
            raise ValueError(
                f"clause {i + 1} has width {len(clause)}; "
                "run to_three_cnf first (exactly 3 literals required)"
            )
        row = [0] * num_vars
        negations = 0
        for lit in clause:
            if lit > 0:
                row[lit - 1] += 1
            else:
                row[-lit - 1] -= 1
                negations += 1
        row[n + 2 * i] = 1
        row[n + 2 * i + 1] = 1
        coeffs.append(row)
        rhs.append(3 - negations)
    return LinearSystem(num_vars, coeffs, rhs)


def dummy_completion(clause_satisfied_count: int) -> tuple[int, int]:
    """Dummy-variable values for a clause with ``k`` satisfied literals:
    3 -> (0, 0), 2 -> (1, 0), 1 -> (1, 1).  ``k = 0`` has no completion."""
    table = {3: (0, 0), 2: (1, 0), 1: (1, 1)}
    try:
        return table[clause_satisfied_count]
    except KeyError:
        raise ValueError(
            f"no dummy completion for satisfied-literal count {clause_satisfied_count}"
        ) from None


def complete_solution(instance: CnfInstance, assignment: dict[int, bool]) -> list[int]:
    """Extend a satisfying CNF assignment to a 0/1 vector solving ``AX = B``.

    Raises ValueError if the assignment leaves some clause unsatisfied.
    """
    n = instance.num_vars
    vector = [0] * (n + 2 * instance.num_clauses)
    for v in range(1, n + 1):
        vector[v - 1] = 1 if assignment[v] else 0
    for i, clause in enumerate(instance.clauses):
        satisfied = sum(1 for lit in clause if assignment[abs(lit)] == (lit > 0))
        d1, d2 = dummy_completion(satisfied)
        vector[n + 2 * i] = d1
        vector[n + 2 * i + 1] = d2
    return vector


def apply_random_matrix(sys: LinearSystem, r: BitMatrix) -> LinearSystem:
    """Return the system ``(RA)X = RB`` (plain integer arithmetic)."""
    if r.cols != sys.num_constraints:
        raise ValueError("R dimension does not match constraint count")
    coeffs = int_mat_mul(r, sys.coeffs)
    rhs = int_mat_vec(r, sys.rhs)
    return LinearSystem(sys.num_vars, coeffs, rhs)


def randomize_system(
    sys: LinearSystem, seed: int, r: BitMatrix | None = None
) -> tuple[LinearSystem, MatrixSecret]:
    """Multiply the encoded system by a seeded random full-rank ``R``.

    The 0/1 solution sets of input and output are identical.  An explicit
    ``r`` may be injected for tests; by default it is drawn from ``seed``.
    """
    m = sys.num_constraints
    if r is None:
        r = random_full_rank(m, random.Random(seed))
    original_n = sys.num_vars - 2 * m
    negation_constants = [3 - b for b in sys.rhs]
    secret = MatrixSecret(r, original_n, original_n, negation_constants, seed)
    return apply_random_matrix(sys, r), secret


def check_linear(sys: LinearSystem, vector: list[int]) -> bool:
    """True iff the 0/1 ``vector`` satisfies every equation."""
    if len(vector) != sys.num_vars:
        raise ValueError("vector length does not match system")
    return all(
        sum(c * x for c, x in zip(row, vector)) == b
        for row, b in zip(sys.coeffs, sys.rhs)
    )


def derandomize_solution(
    sol: list[int], secret: MatrixSecret, original: CnfInstance
) -> dict[int, bool]:
    """Project a solution of ``RAX = RB`` back to the original variables.

    The first ``original_n`` coordinates (1 -> true) are returned after an
    internal check against every original clause; a projection that fails
    the CNF raises :class:`InvalidSolutionError` (provider fraud or an
    implementation bug — never silently accepted).
    """
    expected = secret.original_n + 2 * len(secret.negation_constants)
    if len(sol) != expected:
        raise ValueError(f"solution has {len(sol)} coordinates, expected {expected}")
    if original.num_vars != secret.original_n:
        raise ValueError("original instance does not match secret")
    assignment = {v: bool(sol[v - 1]) for v in range(1, secret.original_n + 1)}
    if not original.satisfies(assignment):
        raise InvalidSolutionError(
            "projected assignment does not satisfy the original instance"
        )
    return assignment


# ---------------------------------------------------------------------------
# OPB (pseudo-Boolean equality) serialization
# ---------------------------------------------------------------------------

def emit_opb(sys: LinearSystem) -> str:
    """Serialize as an OPB file of equality constraints.

    Zero coefficients are omitted; every term carries an explicit sign, e.g.
    ``+1 x1 -2 x3 = 4 ;``.
    """
    lines = [f"* #variable= {sys.num_vars} #constraint= {sys.num_constraints}"]
    for row, b in zip(sys.coeffs, sys.rhs):
        terms = [
            f"{c:+d} x{j + 1}" for j, c in enumerate(row) if c != 0
        ]
        lines.append(" ".join(terms) + f" = {b} ;")
    return "\n".join(lines) + "\n"


_OPB_HEADER = re.compile(r"\*\s*#variable=\s*(\d+)\s+#constraint=\s*(\d+)")
_OPB_TERM = re.compile(r"([+-]\d+)\s+x(\d+)")


def parse_opb(text: str) -> LinearSystem:
    """Parse the equality-OPB dialect written by :func:`emit_opb`."""
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if not lines:
        raise ValueError("empty OPB input")
    header = _OPB_HEADER.match(lines[0])
    if not header:
        raise ValueError(f"malformed OPB header: {lines[0]!r}")
    num_vars, num_constraints = int(header.group(1)), int(header.group(2))
    coeffs = []
    rhs = []
    for line in lines[1:]:
        if line.startswith("*"):
            continue
        body, eq, rest = line.partition("=")
        if not eq or not rest.replace(";", "").strip().lstrip("+-").isdigit():
            raise ValueError(f"malformed OPB constraint: {line!r}")
        row = [0] * num_vars
        consumed = 0
        for match in _OPB_TERM.finditer(body):
            coeff, var = int(match.group(1)), int(match.group(2))
            if not 1 <= var <= num_vars:
                raise ValueError(f"variable x{var} out of range in {line!r}")
            row[var - 1] += coeff
            consumed += len(match.group(0))
        if not body.replace("+", " ").replace("-", " ").strip() and consumed == 0:
            raise ValueError(f"constraint without terms: {line!r}")
        coeffs.append(row)
        rhs.append(int(rest.replace(";", "").strip()))
    if len(coeffs) != num_constraints:
        raise ValueError(
            f"constraint count mismatch: header says {num_constraints}, "
            f"found {len(coeffs)}"
        )
    return LinearSystem(num_vars, coeffs, rhs)
