"""Baseline instance randomizer: variable permutation plus polarity flips.

This transformation is an isomorphism of the instance — it cannot change the
variable count, clause count, or clause-length profile, which is exactly the
statistical leakage that motivates the heavier randomizers.  It is cheap,
composes with everything, and inverts trivially.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .cnf import CnfInstance

__all__ = ["IsoSecret", "apply_iso", "iso_randomize", "iso_derandomize", "iso_forward"]


@dataclass
class IsoSecret:
    """``permutation[v-1]`` is the randomized index of original variable ``v``;
    ``flips`` holds the original variables whose polarity is inverted."""

    permutation: list[int]
    flips: frozenset[int]
    seed: int

    def __post_init__(self) -> None:
        n = len(self.permutation)
        if sorted(self.permutation) != list(range(1, n + 1)):
            raise ValueError("permutation is not a bijection on 1..n")
        if any(v < 1 or v > n for v in self.flips):
            raise ValueError("flip set mentions out-of-range variables")


def apply_iso(
    instance: CnfInstance, secret: IsoSecret, shuffle_clauses: bool = False
) -> CnfInstance:
    """Map literal ``(v, p)`` to ``(permutation(v), p xor flip(v))``.

    Clause shuffling is optional here so tests can apply hand-built secrets
    deterministically; :func:`iso_randomize` always shuffles.
    """
    if len(secret.permutation) != instance.num_vars:
        raise ValueError("secret size does not match instance")
    clauses = []
    for clause in instance.clauses:
        mapped = []
        for lit in clause:
            v = abs(lit)
            polarity = (lit > 0) != (v in secret.flips)
            w = secret.permutation[v - 1]
            mapped.append(w if polarity else -w)
        clauses.append(mapped)
    if shuffle_clauses:
        random.Random(secret.seed ^ 0x5CA7).shuffle(clauses)
    return CnfInstance(instance.num_vars, clauses)


def iso_randomize(instance: CnfInstance, seed: int) -> tuple[CnfInstance, IsoSecret]:
    """Draw a uniform permutation and per-variable coin-flip polarity set,
    apply them, and shuffle clause order.  Deterministic given ``seed``."""
    rng = random.Random(seed)
    n = instance.num_vars
    permutation = list(range(1, n + 1))
    rng.shuffle(permutation)
    flips = frozenset(v for v in range(1, n + 1) if rng.random() < 0.5)
    secret = IsoSecret(permutation, flips, seed)
    return apply_iso(instance, secret, shuffle_clauses=True), secret


def iso_derandomize(solution: dict[int, bool], secret: IsoSecret) -> dict[int, bool]:
    """Invert the map on assignments: ``x_v = y_{permutation(v)} xor flip(v)``."""
    n = len(secret.permutation)
    missing = [secret.permutation[v - 1] for v in range(1, n + 1)
               if secret.permutation[v - 1] not in solution]
    if missing:
        raise ValueError(f"solution domain is missing variables {missing}")
    return {
        v: solution[secret.permutation[v - 1]] != (v in secret.flips)
        for v in range(1, n + 1)
    }


def iso_forward(assignment: dict[int, bool], secret: IsoSecret) -> dict[int, bool]:
    """Forward map on assignments: ``y_{permutation(v)} = x_v xor flip(v)``."""
    n = len(secret.permutation)
    if any(v not in assignment for v in range(1, n + 1)):
        raise ValueError("assignment does not cover 1..n")
    return {
        secret.permutation[v - 1]: assignment[v] != (v in secret.flips)
        for v in range(1, n + 1)
    }
