"""CNF data model, DIMACS I/O, 3CNF conversion, and Tseitin encoding.

Literals are DIMACS-style signed integers: ``v`` is the positive occurrence
of variable ``v`` (``v >= 1``) and ``-v`` its negation.  A clause is a list of
literals, an instance is a clause list plus a variable count.  Every
transformation in the toolkit consumes and produces these objects.

Boolean formulas (used by the firewall encoder and the cost-circuit
compiler) are immutable nested tuples, e.g. ``("and", (("var", 1),
("not", ("var", 2))))``.  Because tuples hash structurally, the Tseitin
encoder can share gates between identical subformulas for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "DimacsError",
    "InvalidSolutionError",
    "CnfInstance",
    "clause_satisfied",
    "parse_dimacs",
    "emit_dimacs",
    "ThreeCnfMap",
    "to_three_cnf",
    "complete_to_three_cnf",
    "TRUE",
    "FALSE",
    "f_var",
    "f_not",
    "f_and",
    "f_or",
    "f_xor",
    "f_iff",
    "eval_formula",
    "formula_vars",
    "formula_size",
    "TseitinMap",
    "TseitinEncoder",
    "tseitin",
    "evaluate_gates",
]


class DimacsError(ValueError):
    """Raised for malformed DIMACS input."""


class InvalidSolutionError(Exception):
    """A provider-supplied solution failed validation against the original
    instance.  Distinct from ValueError so callers can tell fraud (or an
    implementation bug) apart from plain usage errors."""


@dataclass
class CnfInstance:
    """A CNF formula: ``num_vars`` variables, clauses over signed literals.

    Instances are treated as immutable after construction; all operations
    return new objects.
    """

    num_vars: int
    clauses: list[list[int]]

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def validate(self) -> None:
        if self.num_vars < 0:
            raise ValueError("negative variable count")
        for clause in self.clauses:
            if not clause:
                raise ValueError("empty clause")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    def satisfies(self, assignment: dict[int, bool]) -> bool:
        """True iff ``assignment`` satisfies every clause."""
        return all(clause_satisfied(c, assignment) for c in self.clauses)


def clause_satisfied(clause: list[int], assignment: dict[int, bool]) -> bool:
    return any(assignment[abs(lit)] == (lit > 0) for lit in clause)


def _dedupe_clause(lits: list[int]) -> list[int]:
    # Collapse repeated same-polarity literals, keep first-seen order.
    # Tautologies (v and -v together) are preserved verbatim.
    seen: set[int] = set()
    out: list[int] = []
    for lit in lits:
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return out


def parse_dimacs(text: str | bytes) -> CnfInstance:
    """Parse DIMACS CNF text.

    Grammar: optional ``c`` comment lines, one ``p cnf <n> <m>`` header,
    then ``m`` clauses as whitespace-separated nonzero integers each
    terminated by ``0``.  Raises :class:`DimacsError` on malformed headers,
    clause-count mismatches, out-of-range variables, or zero-length clauses.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")
    num_vars = -1
    num_clauses = -1
    tokens: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars != -1:
                raise DimacsError("duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"malformed problem line: {line!r}")
            try:
                num_vars = int(parts[2])
                num_clauses = int(parts[3])
            except ValueError as exc:
                raise DimacsError(f"malformed problem line: {line!r}") from exc
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError(f"negative counts in problem line: {line!r}")
            continue
        tokens.extend(line.split())
    if num_vars == -1:
        raise DimacsError("missing problem line")

    clauses: list[list[int]] = []
    current: list[int] = []
    for tok in tokens:
        try:
            lit = int(tok)
        except ValueError as exc:
            raise DimacsError(f"non-integer token {tok!r}") from exc
        if lit == 0:
            if not current:
                raise DimacsError(f"zero-length clause (clause {len(clauses) + 1})")
            clauses.append(_dedupe_clause(current))
            current = []
        else:
            if abs(lit) > num_vars:
                raise DimacsError(
                    f"variable {abs(lit)} exceeds declared maximum {num_vars}"
                )
            current.append(lit)
    if current:
        raise DimacsError("unterminated clause at end of input")
    if len(clauses) != num_clauses:
        raise DimacsError(
            f"clause count mismatch: header says {num_clauses}, found {len(clauses)}"
        )
    return CnfInstance(num_vars, clauses)


def emit_dimacs(instance: CnfInstance) -> str:
    """Serialize to canonical DIMACS text (one clause per line)."""
    lines = [f"p cnf {instance.num_vars} {instance.num_clauses}"]
    for clause in instance.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CNF -> exactly-3CNF conversion
# ---------------------------------------------------------------------------

@dataclass
class ThreeCnfMap:
    """Records which output variables are original and how the introduced
    dummies are completed.

    ``definitions`` maps each fresh variable to either ``("or", (lits...))``
    — a chain-splitting variable defined as the truth of the clause suffix —
    or ``("false",)`` — a padding variable whose canonical completion is
    False.  Variables ``1..original_num_vars`` are the originals.
    """

    original_num_vars: int
    num_vars: int
    definitions: dict[int, tuple] = field(default_factory=dict)

    def is_original(self, var: int) -> bool:
        return 1 <= var <= self.original_num_vars


def to_three_cnf(instance: CnfInstance) -> tuple[CnfInstance, ThreeCnfMap]:
    """Convert any CNF to an equisatisfiable, exactly-3-literal CNF.

    Clauses longer than 3 are chain-split with one fresh variable per split
    point; clauses of width 1 or 2 are padded by fresh-variable case
    expansion (unit -> 4 clauses, binary -> 2 clauses) so every output
    clause has exactly three literals.  Any satisfying assignment of the
    output restricted to the original variables satisfies the input.

    Raises ValueError if the input contains an empty clause (trivially
    unsatisfiable; flagged rather than encoded).
    """
    next_var = instance.num_vars + 1
    out: list[list[int]] = []
    defs: dict[int, tuple] = {}
    for clause in instance.clauses:
        w = len(clause)
        if w == 0:
            raise ValueError("empty clause: input is trivially unsatisfiable")
        if w == 3:
            out.append(list(clause))
        elif w == 1:
            (a,) = clause
            p, q = next_var, next_var + 1
            next_var += 2
            defs[p] = ("false",)
            defs[q] = ("false",)
            out.extend([[a, p, q], [a, -p, q], [a, p, -q], [a, -p, -q]])
        elif w == 2:
            a, b = clause
            p = next_var
            next_var += 1
            defs[p] = ("false",)
            out.extend([[a, b, p], [a, b, -p]])
        else:
            # (l1 l2 s1) (-s1 l3 s2) ... (-s_{w-3} l_{w-1} l_w); each s_i is
            # defined as the truth of the remaining suffix l_{i+2}..l_w.
            svars = list(range(next_var, next_var + w - 3))
            next_var += w - 3
            for idx, s in enumerate(svars):
                defs[s] = ("or", tuple(clause[idx + 2 :]))
            out.append([clause[0], clause[1], svars[0]])
            for i in range(1, w - 3):
                out.append([-svars[i - 1], clause[i + 1], svars[i]])
            out.append([-svars[-1], clause[w - 2], clause[w - 1]])
    cnf = CnfInstance(next_var - 1, out)
    return cnf, ThreeCnfMap(instance.num_vars, next_var - 1, defs)


def complete_to_three_cnf(
    mapping: ThreeCnfMap, assignment: dict[int, bool]
) -> dict[int, bool]:
    """Extend an assignment of the original variables to the 3CNF's dummies
    using the canonical completion recorded in ``mapping``.

    If the input assignment satisfies the original CNF, the returned total
    assignment satisfies the converted one.
    """
    full = dict(assignment)
    for var, definition in mapping.definitions.items():
        if definition[0] == "false":
            full[var] = False
        else:
            full[var] = any(full[abs(l)] == (l > 0) for l in definition[1])
    return full


# ---------------------------------------------------------------------------
# Boolean formulas
# ---------------------------------------------------------------------------

# Empty conjunction / disjunction double as the constants.
TRUE = ("and", ())
FALSE = ("or", ())


def f_var(i: int):
    if i < 1:
        raise ValueError("variable indices start at 1")
    return ("var", i)


def f_not(f):
    if f == TRUE:
        return FALSE
    if f == FALSE:
        return TRUE
    if f[0] == "not":
        return f[1]
    return ("not", f)


def f_and(*fs):
    children = []
    for f in fs:
        if f == FALSE:
            return FALSE
        if f == TRUE:
            continue
        children.append(f)
    if len(children) == 1:
        return children[0]
    return ("and", tuple(children))


def f_or(*fs):
    children = []
    for f in fs:
        if f == TRUE:
            return TRUE
        if f == FALSE:
            continue
        children.append(f)
    if len(children) == 1:
        return children[0]
    return ("or", tuple(children))


def f_xor(a, b):
    if a == FALSE:
        return b
    if b == FALSE:
        return a
    if a == TRUE:
        return f_not(b)
    if b == TRUE:
        return f_not(a)
    return ("xor", (a, b))


def f_iff(a, b):
    return f_not(f_xor(a, b))


def eval_formula(f, assignment: dict[int, bool]) -> bool:
    op = f[0]
    if op == "var":
        return assignment[f[1]]
    if op == "not":
        return not eval_formula(f[1], assignment)
    if op == "and":
        return all(eval_formula(c, assignment) for c in f[1])
    if op == "or":
        return any(eval_formula(c, assignment) for c in f[1])
    if op == "xor":
        a, b = f[1]
        return eval_formula(a, assignment) != eval_formula(b, assignment)
    if op == "iff":
        a, b = f[1]
        return eval_formula(a, assignment) == eval_formula(b, assignment)
    raise ValueError(f"unknown formula node {op!r}")


def formula_vars(f) -> set[int]:
    op = f[0]
    if op == "var":
        return {f[1]}
    if op == "not":
        return formula_vars(f[1])
    out: set[int] = set()
    for c in f[1]:
        out |= formula_vars(c)
    return out


def formula_size(f) -> int:
    """Number of distinct subformula nodes (the DAG size after sharing)."""
    seen: set = set()

    def walk(g) -> None:
        if g in seen:
            return
        seen.add(g)
        if g[0] == "var":
            return
        if g[0] == "not":
            walk(g[1])
        else:
            for c in g[1]:
                walk(c)

    walk(f)
    return len(seen)


@dataclass
class TseitinMap:
    """Gate dictionary of a Tseitin encoding.

    ``gates`` maps each fresh gate variable to ``(op, input_literals)`` in
    definition (topological) order, where ``op`` is ``"and"``, ``"or"`` or
    ``"xor"`` and the inputs are signed literals over input variables or
    earlier gates.  For every assignment of the input variables there is
    exactly one extension to the gates satisfying the definition clauses;
    :func:`evaluate_gates` computes it.
    """

    num_input_vars: int
    num_vars: int
    gates: dict[int, tuple[str, tuple[int, ...]]] = field(default_factory=dict)


class TseitinEncoder:
    """Incremental Tseitin encoder with structural sharing.

    Identical subformulas (as tuples) are encoded once; NOT nodes reuse the
    child's gate with flipped sign, so the CNF stays linear in the number of
    distinct nodes.  Callers may encode several formulas against one shared
    gate pool (the cost-circuit compiler does).
    """

    def __init__(self, num_input_vars: int):
        self.num_input_vars = num_input_vars
        self._next = num_input_vars + 1
        self.clauses: list[list[int]] = []
        self.gates: dict[int, tuple[str, tuple[int, ...]]] = {}
        self._memo: dict = {}

    def _fresh(self) -> int:
        v = self._next
        self._next += 1
        return v

    def encode(self, formula) -> int:
        """Encode ``formula``, returning its root as a signed literal."""
        hit = self._memo.get(formula)
        if hit is not None:
            return hit
        op = formula[0]
        if op == "var":
            lit = formula[1]
            if lit > self.num_input_vars:
                raise ValueError(
                    f"variable {lit} exceeds reserved input range "
                    f"1..{self.num_input_vars}"
                )
        elif op == "not":
            lit = -self.encode(formula[1])
        elif op == "iff":
            a, b = formula[1]
            lit = -self.encode(("xor", (a, b)))
        elif op == "xor":
            a, b = formula[1]
            la, lb = self.encode(a), self.encode(b)
            g = self._fresh()
            self.gates[g] = ("xor", (la, lb))
            self.clauses.extend(
                [[-g, la, lb], [-g, -la, -lb], [g, la, -lb], [g, -la, lb]]
            )
            lit = g
        elif op in ("and", "or"):
            lits = tuple(self.encode(c) for c in formula[1])
            if len(lits) == 1:
                lit = lits[0]
            else:
                g = self._fresh()
                self.gates[g] = (op, lits)
                if op == "and":
                    for l in lits:
                        self.clauses.append([-g, l])
                    self.clauses.append([g] + [-l for l in lits])
                else:
                    for l in lits:
                        self.clauses.append([g, -l])
                    self.clauses.append([-g] + list(lits))
                lit = g
        else:
            raise ValueError(f"unknown formula node {op!r}")
        self._memo[formula] = lit
        return lit

    def materialize(self, lit: int) -> int:
        """Return a positive variable equal to ``lit``, adding a pass-through
        gate when ``lit`` is negative."""
        if lit > 0:
            return lit
        g = self._fresh()
        self.gates[g] = ("and", (lit,))
        self.clauses.extend([[-g, lit], [g, -lit]])
        return g

    @property
    def num_vars(self) -> int:
        return self._next - 1

    def cnf(self) -> CnfInstance:
        return CnfInstance(self.num_vars, [list(c) for c in self.clauses])

    def mapping(self) -> TseitinMap:
        return TseitinMap(self.num_input_vars, self.num_vars, dict(self.gates))


def tseitin(formula, num_input_vars: int | None = None):
    """Tseitin-encode ``formula``.

    Returns ``(cnf, root_literal, mapping)``.  The CNF contains only gate
    definition clauses (the root is not asserted); its size is linear in the
    number of distinct formula nodes.  ``root_literal`` is a signed literal:
    for plain variables and NOT chains no gate is allocated at the root.

    ``num_input_vars`` reserves variable indices ``1..num_input_vars`` for
    inputs (defaults to the largest variable mentioned in the formula).
    """
    if num_input_vars is None:
        vs = formula_vars(formula)
        num_input_vars = max(vs) if vs else 0
    enc = TseitinEncoder(num_input_vars)
    root = enc.encode(formula)
    return enc.cnf(), root, enc.mapping()


def evaluate_gates(mapping: TseitinMap, inputs: dict[int, bool]) -> dict[int, bool]:
    """Compute the unique gate extension of an input assignment.

    ``inputs`` must cover variables ``1..num_input_vars``.  Returns a total
    assignment over ``1..num_vars`` satisfying every definition clause.
    """
    full = {v: inputs[v] for v in range(1, mapping.num_input_vars + 1)}

    def lit_value(lit: int) -> bool:
        return full[abs(lit)] == (lit > 0)

    for gate, (op, lits) in mapping.gates.items():
        if op == "and":
            full[gate] = all(lit_value(l) for l in lits)
        elif op == "or":
            full[gate] = any(lit_value(l) for l in lits)
        elif op == "xor":
            a, b = lits
            full[gate] = lit_value(a) != lit_value(b)
        else:
            raise ValueError(f"unknown gate op {op!r}")
    return full
