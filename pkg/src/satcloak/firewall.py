"""Firewall policies as Boolean formulas, and their randomization.

A policy is an ordered rule list with first-match semantics over a packet
header of ``k`` bits (source IP, source port, destination IP, destination
port, in that bit order).  Each rule becomes a conjunction over the bits
of its concrete fields; the whole policy becomes the first-match chain

    accepts(h)  =  OR_i [ M_i(h) AND NOT M_1(h) ... NOT M_{i-1}(h) ]

over its accept rules (plus a catch-all term for an accept default).  Two
policies are equivalent iff the XOR of their formulas is unsatisfiable;
the Tseitin CNF of that XOR is the checkable artifact, and any satisfying
assignment decodes to a concrete witness packet the policies disagree on.

Before outsourcing, field values are disguised by per-position bijections:
one map per IP chunk position (shared between source and destination
addresses) plus one port map (shared between source and destination
ports).  Wildcards stay wildcards and rule order is untouched, so the
mapped policy is the original up to a relabeling of header space — which
also means value frequencies survive (a port that appears often still
appears often under its new name; this leak is inherent to the scheme).

IP fields whose width is a multiple of four are modeled as four dotted
chunks (octets at the default 32 bits); narrower test layouts use a
single chunk.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .cnf import (
    CnfInstance,
    InvalidSolutionError,
    TseitinEncoder,
    f_and,
    f_not,
    f_or,
    f_var,
    f_xor,
)

__all__ = [
    "FirewallRule",
    "FirewallPolicy",
    "HeaderLayout",
    "FieldMappingSecret",
    "DEFAULT_LAYOUT",
    "map_fields",
    "match_predicate",
    "encode_policy",
    "policy_accepts",
    "rule_matches",
    "equivalence_cnf",
    "decode_witness",
    "parse_policy",
    "emit_policy",
]

_ACTIONS = ("accept", "deny")


@dataclass(frozen=True)
class FirewallRule:
    """One filtering rule; field order matches the on-disk and on-wire
    order (source IP, source port, destination IP, destination port).

    Wildcards are ``None``: a ``None`` chunk inside an IP tuple wildcards
    that chunk, a ``None`` field wildcards the whole field."""

    src_ip: tuple[int | None, ...] | None
    src_port: int | None
    dst_ip: tuple[int | None, ...] | None
    dst_port: int | None
    action: str

    def __post_init__(self):
        if self.action not in _ACTIONS:
            raise ValueError(f"action must be accept or deny, not {self.action!r}")


@dataclass
class FirewallPolicy:
    """Ordered rules plus an explicit default action; the first matching
    rule decides, the default decides when none match."""

    rules: list[FirewallRule]
    default_action: str

    def __post_init__(self):
        if self.default_action not in _ACTIONS:
            raise ValueError(
                f"default action must be accept or deny, not {self.default_action!r}"
            )


@dataclass(frozen=True)
class HeaderLayout:
    """Bit widths of the four header fields (default 32+16+32+16 = 96)."""

    src_ip_bits: int = 32
    src_port_bits: int = 16
    dst_ip_bits: int = 32
    dst_port_bits: int = 16

    def __post_init__(self):
        for name, bits in self.fields():
            if bits < 1:
                raise ValueError(f"{name} must be at least 1 bit")

    def fields(self) -> list[tuple[str, int]]:
        return [
            ("src_ip", self.src_ip_bits),
            ("src_port", self.src_port_bits),
            ("dst_ip", self.dst_ip_bits),
            ("dst_port", self.dst_port_bits),
        ]

    @property
    def total_bits(self) -> int:
        return sum(bits for _, bits in self.fields())

    def ip_chunks(self, bits: int) -> list[int]:
        """Chunk widths of an IP field: dotted quarters when divisible by
        four (octets at 32 bits), a single chunk otherwise."""
        if bits % 4 == 0:
            return [bits // 4] * 4
        return [bits]


DEFAULT_LAYOUT = HeaderLayout()


def _check_rule(rule: FirewallRule, layout: HeaderLayout) -> None:
    for name, bits in layout.fields():
        value = getattr(rule, name)
        if value is None:
            continue
        if name.endswith("_ip"):
            chunks = layout.ip_chunks(bits)
            if len(value) != len(chunks):
                raise ValueError(
                    f"{name} has {len(value)} chunks, layout wants {len(chunks)}"
                )
            for v, w in zip(value, chunks):
                if v is not None and not 0 <= v < (1 << w):
                    raise ValueError(f"{name} chunk {v} exceeds {w} bits")
        elif not 0 <= value < (1 << bits):
            raise ValueError(f"{name} value {value} exceeds {bits} bits")


# ---------------------------------------------------------------------------
# Field mapping (value randomization)
# ---------------------------------------------------------------------------

@dataclass
class FieldMappingSecret:
    """Per-chunk-position bijections for IP values plus one port bijection.

    The same chunk maps serve source and destination addresses, and the
    same port map serves both ports — consistency across all rules is what
    keeps the mapped policy meaningful.
    """

    octet_maps: list[dict[int, int]]
    port_map: dict[int, int]
    seed: int | None = None

    def validate(self) -> None:
        for i, m in enumerate(self.octet_maps):
            if len(set(m.values())) != len(m) or set(m.values()) != set(m.keys()):
                raise ValueError(f"octet map {i} is not a bijection on its domain")
        pm = self.port_map
        if len(set(pm.values())) != len(pm) or set(pm.values()) != set(pm.keys()):
            raise ValueError("port map is not a bijection on its domain")

    @classmethod
    def random(cls, layout: HeaderLayout, seed: int) -> "FieldMappingSecret":
        """Uniform random bijections over the full value domains."""
        if layout.ip_chunks(layout.src_ip_bits) != layout.ip_chunks(layout.dst_ip_bits):
            raise ValueError("source/destination IP chunking differs; cannot share maps")
        if layout.src_port_bits != layout.dst_port_bits:
            raise ValueError("source/destination port widths differ; cannot share map")
        rng = random.Random(seed)

        def perm(size: int) -> dict[int, int]:
            values = list(range(size))
            rng.shuffle(values)
            return dict(enumerate(values))

        octet_maps = [perm(1 << w) for w in layout.ip_chunks(layout.src_ip_bits)]
        return cls(octet_maps, perm(1 << layout.src_port_bits), seed)

    @classmethod
    def from_swaps(
        cls,
        octet_swaps: list[list[tuple[int, int]]],
        port_swaps: list[tuple[int, int]],
        layout: HeaderLayout = DEFAULT_LAYOUT,
    ) -> "FieldMappingSecret":
        """Identity maps with the given transpositions applied — handy for
        spelling out small concrete mappings (a <-> b per position)."""

        def build(size: int, swaps: list[tuple[int, int]]) -> dict[int, int]:
            m = {v: v for v in range(size)}
            for a, b in swaps:
                m[a], m[b] = m[b], m[a]
            return m

        chunk_widths = layout.ip_chunks(layout.src_ip_bits)
        if len(octet_swaps) != len(chunk_widths):
            raise ValueError(
                f"need swap lists for {len(chunk_widths)} chunk positions"
            )
        octet_maps = [
            build(1 << w, swaps) for w, swaps in zip(chunk_widths, octet_swaps)
        ]
        return cls(octet_maps, build(1 << layout.src_port_bits, port_swaps))


def map_fields(
    policy: FirewallPolicy,
    seed: int | None = None,
    *,
    secret: FieldMappingSecret | None = None,
    layout: HeaderLayout = DEFAULT_LAYOUT,
) -> tuple[FirewallPolicy, FieldMappingSecret]:
    """Replace every concrete field value via the (shared) bijections.

    Wildcards and rule order are preserved.  Supply ``secret`` to reuse an
    existing mapping; otherwise one is drawn from ``seed``.
    """
    if secret is None:
        if seed is None:
            raise ValueError("either seed or secret is required")
        secret = FieldMappingSecret.random(layout, seed)
    secret.validate()

    def map_ip(ip):
        if ip is None:
            return None
        out = []
        for i, v in enumerate(ip):
            if v is None:
                out.append(None)
            elif i >= len(secret.octet_maps) or v not in secret.octet_maps[i]:
                raise ValueError(f"chunk value {v} outside mapping domain")
            else:
                out.append(secret.octet_maps[i][v])
        return tuple(out)

    def map_port(p):
        if p is None:
            return None
        if p not in secret.port_map:
            raise ValueError(f"port {p} outside mapping domain")
        return secret.port_map[p]

    mapped = []
    for rule in policy.rules:
        _check_rule(rule, layout)
        mapped.append(
            FirewallRule(
                map_ip(rule.src_ip),
                map_port(rule.src_port),
                map_ip(rule.dst_ip),
                map_port(rule.dst_port),
                rule.action,
            )
        )
    return FirewallPolicy(mapped, policy.default_action), secret


# ---------------------------------------------------------------------------
# Bit-level encoding
# ---------------------------------------------------------------------------

def _field_offsets(layout: HeaderLayout) -> dict[str, int]:
    offsets = {}
    pos = 0
    for name, bits in layout.fields():
        offsets[name] = pos
        pos += bits
    return offsets


def _value_conjuncts(value: int, offset: int, width: int) -> list:
    """Bit literals fixing ``width`` header bits (MSB first) to ``value``."""
    out = []
    for i in range(width):
        var = f_var(offset + i + 1)
        out.append(var if (value >> (width - 1 - i)) & 1 else f_not(var))
    return out


def match_predicate(rule: FirewallRule, layout: HeaderLayout = DEFAULT_LAYOUT):
    """Boolean formula over header bits, true exactly on headers the rule
    matches.  Wildcarded fields and chunks contribute nothing; an
    all-wildcard rule is the constant true."""
    _check_rule(rule, layout)
    offsets = _field_offsets(layout)
    conjuncts = []
    for name, bits in layout.fields():
        value = getattr(rule, name)
        if value is None:
            continue
        if name.endswith("_ip"):
            pos = offsets[name]
            for v, w in zip(value, layout.ip_chunks(bits)):
                if v is not None:
                    conjuncts.extend(_value_conjuncts(v, pos, w))
                pos += w
        else:
            conjuncts.extend(_value_conjuncts(value, offsets[name], bits))
    return f_and(*conjuncts)


def _disjoint(r1: FirewallRule, r2: FirewallRule, layout: HeaderLayout) -> bool:
    """True if no header can match both rules (some position pins two
    different concrete values)."""
    for name, bits in layout.fields():
        v1, v2 = getattr(r1, name), getattr(r2, name)
        if v1 is None or v2 is None:
            continue
        if name.endswith("_ip"):
            for a, b in zip(v1, v2):
                if a is not None and b is not None and a != b:
                    return True
        elif v1 != v2:
            return True
    return False


def encode_policy(
    policy: FirewallPolicy,
    layout: HeaderLayout = DEFAULT_LAYOUT,
    hoist_independent: bool = False,
):
    """Formula true exactly on headers the policy accepts.

    Builds the general first-match chain.  With ``hoist_independent`` the
    not-an-earlier-match guards that are provably redundant (the earlier
    rule cannot overlap this one) are dropped — a pure size optimization,
    never a semantic change.
    """
    preds = [match_predicate(rule, layout) for rule in policy.rules]
    terms = []
    for i, rule in enumerate(policy.rules):
        if rule.action != "accept":
            continue
        guards = []
        for j in range(i):
            if hoist_independent and _disjoint(rule, policy.rules[j], layout):
                continue
            guards.append(f_not(preds[j]))
        terms.append(f_and(preds[i], *guards))
    if policy.default_action == "accept":
        terms.append(f_and(*[f_not(p) for p in preds]))
    return f_or(*terms)


def rule_matches(rule: FirewallRule, header: int, layout: HeaderLayout) -> bool:
    """Direct (non-symbolic) match test of one rule against a packed header."""
    total = layout.total_bits
    offsets = _field_offsets(layout)

    def bits_at(offset: int, width: int) -> int:
        return (header >> (total - offset - width)) & ((1 << width) - 1)

    for name, width in layout.fields():
        value = getattr(rule, name)
        if value is None:
            continue
        if name.endswith("_ip"):
            pos = offsets[name]
            for v, w in zip(value, layout.ip_chunks(width)):
                if v is not None and bits_at(pos, w) != v:
                    return False
                pos += w
        elif bits_at(offsets[name], width) != value:
            return False
    return True


def policy_accepts(
    policy: FirewallPolicy, header: int, layout: HeaderLayout = DEFAULT_LAYOUT
) -> bool:
    """Reference first-match evaluation on a packed header value."""
    if not 0 <= header < (1 << layout.total_bits):
        raise ValueError("header value exceeds layout width")
    for rule in policy.rules:
        if rule_matches(rule, header, layout):
            return rule.action == "accept"
    return policy.default_action == "accept"


def equivalence_cnf(
    p1: FirewallPolicy,
    p2: FirewallPolicy,
    layout: HeaderLayout = DEFAULT_LAYOUT,
    hoist_independent: bool = False,
) -> CnfInstance:
    """CNF satisfiable iff the two policies disagree on some header.

    Variables ``1..layout.total_bits`` are the header bits; the rest are
    Tseitin gates of ``encode(p1) XOR encode(p2)``, with the root asserted
    by a unit clause.  A satisfying assignment's header bits are a packet
    the policies classify differently (see :func:`decode_witness`).
    """
    diff = f_xor(encode_policy(p1, layout, hoist_independent),
                 encode_policy(p2, layout, hoist_independent))
    enc = TseitinEncoder(layout.total_bits)
    root = enc.encode(diff)
    clauses = [list(c) for c in enc.clauses] + [[root]]
    return CnfInstance(max(enc.num_vars, abs(root)), clauses)


def decode_witness(
    sol: dict[int, bool],
    layout: HeaderLayout = DEFAULT_LAYOUT,
    p1: FirewallPolicy | None = None,
    p2: FirewallPolicy | None = None,
) -> dict:
    """Slice the header bits of an equivalence-CNF solution into field
    values.

    Returns ``{"header": packed int, "src_ip": chunk tuple, "src_port":
    int, ...}``.  When both policies are supplied the witness is replayed
    through direct simulation and must actually separate them; otherwise
    :class:`InvalidSolutionError` (a tampered or fabricated witness)."""
    total = layout.total_bits
    header = 0
    for v in range(1, total + 1):
        try:
            bit = sol[v]
        except KeyError:
            raise ValueError(f"solution is missing header bit {v}") from None
        header = (header << 1) | (1 if bit else 0)
    fields: dict = {"header": header}
    pos = 0
    for name, bits in layout.fields():
        raw = (header >> (total - pos - bits)) & ((1 << bits) - 1)
        if name.endswith("_ip"):
            chunks = []
            cpos = 0
            for w in layout.ip_chunks(bits):
                chunks.append((raw >> (bits - cpos - w)) & ((1 << w) - 1))
                cpos += w
            fields[name] = tuple(chunks)
        else:
            fields[name] = raw
        pos += bits
    if p1 is not None and p2 is not None:
        if policy_accepts(p1, header, layout) == policy_accepts(p2, header, layout):
            raise InvalidSolutionError(
                "decoded header does not distinguish the two policies"
            )
    return fields


# ---------------------------------------------------------------------------
# Policy file format
# ---------------------------------------------------------------------------

def _parse_ip(token: str):
    if token == "*":
        return None
    chunks = []
    for part in token.split("."):
        if part == "*":
            chunks.append(None)
        else:
            try:
                chunks.append(int(part))
            except ValueError as exc:
                raise ValueError(f"bad IP chunk {part!r} in {token!r}") from exc
            if chunks[-1] < 0:
                raise ValueError(f"negative IP chunk in {token!r}")
    return tuple(chunks)


def _parse_port(token: str):
    if token == "*":
        return None
    try:
        value = int(token)
    except ValueError as exc:
        raise ValueError(f"bad port {token!r}") from exc
    if value < 0:
        raise ValueError(f"negative port {token!r}")
    return value


def parse_policy(text: str) -> FirewallPolicy:
    """Parse the policy file format: one `src_ip src_port dst_ip dst_port
    action` rule per line plus exactly one `default <action>` line; ``*``
    wildcards a field or a single IP chunk; ``#`` starts a comment."""
    rules = []
    default = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "default":
            if len(parts) != 2 or parts[1] not in _ACTIONS:
                raise ValueError(f"line {lineno}: bad default line {line!r}")
            if default is not None:
                raise ValueError(f"line {lineno}: duplicate default line")
            default = parts[1]
            continue
        if len(parts) != 5:
            raise ValueError(
                f"line {lineno}: expected 5 fields "
                f"(src_ip src_port dst_ip dst_port action), got {len(parts)}"
            )
        if parts[4] not in _ACTIONS:
            raise ValueError(f"line {lineno}: unknown action {parts[4]!r}")
        try:
            rules.append(
                FirewallRule(
                    _parse_ip(parts[0]),
                    _parse_port(parts[1]),
                    _parse_ip(parts[2]),
                    _parse_port(parts[3]),
                    parts[4],
                )
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if default is None:
        raise ValueError("missing 'default <accept|deny>' line")
    return FirewallPolicy(rules, default)


def _ip_str(ip) -> str:
    if ip is None:
        return "*"
    return ".".join("*" if v is None else str(v) for v in ip)


def emit_policy(policy: FirewallPolicy) -> str:
    lines = []
    for r in policy.rules:
        port = "*" if r.src_port is None else str(r.src_port)
        dport = "*" if r.dst_port is None else str(r.dst_port)
        lines.append(
            f"{_ip_str(r.src_ip)} {port} {_ip_str(r.dst_ip)} {dport} {r.action}"
        )
    lines.append(f"default {policy.default_action}")
    return "\n".join(lines) + "\n"
