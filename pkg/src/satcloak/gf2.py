"""Dense 0/1 matrices with GF(2) and integer-arithmetic semantics.

Rows are stored as Python integers used as bitsets (bit ``j`` = column
``j``), which makes elimination a matter of XORing machine words.  The same
0/1 matrix can be multiplied either over GF(2) (for the solution-set
randomizer) or over the integers (for the linear-system randomizer); both
views are provided here.

Random full-rank generation is rejection sampling: a uniform 0/1 matrix is
invertible over GF(2) with probability approaching ~0.2888, so a handful of
draws suffices.  All randomness is seeded; the drawn matrix is part of the
client's secret.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

__all__ = [
    "SingularMatrixError",
    "RankSamplingError",
    "BitMatrix",
    "gf2_rank",
    "gf2_invert",
    "gf2_mat_mul",
    "gf2_mat_vec",
    "int_mat_mul",
    "int_mat_vec",
    "random_full_rank",
    "random_sparse_full_rank",
]

#: Rejection-sampling budget before giving up on full rank.
MAX_RANK_RETRIES = 64


class SingularMatrixError(ValueError):
    """Inversion was requested for a matrix without full GF(2) rank."""


class RankSamplingError(RuntimeError):
    """No full-rank matrix was found within the retry budget (for the sparse
    sampler this signals the caller to raise ``row_weight``)."""


@dataclass
class BitMatrix:
    """A ``rows`` x ``cols`` 0/1 matrix; ``row_bits[i]`` bit ``j`` is entry (i, j)."""

    rows: int
    cols: int
    row_bits: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.row_bits) != self.rows:
            raise ValueError("row count does not match bit storage")
        mask = (1 << self.cols) - 1
        for bits in self.row_bits:
            if bits & ~mask:
                raise ValueError("row has bits beyond declared column count")

    @classmethod
    def identity(cls, dim: int) -> "BitMatrix":
        return cls(dim, dim, [1 << i for i in range(dim)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, [0] * rows)

    @classmethod
    def from_rows(cls, rows: list[list[int]]) -> "BitMatrix":
        nr = len(rows)
        nc = len(rows[0]) if rows else 0
        bits = []
        for row in rows:
            if len(row) != nc:
                raise ValueError("ragged rows")
            acc = 0
            for j, entry in enumerate(row):
                if entry not in (0, 1):
                    raise ValueError("entries must be 0 or 1")
                acc |= entry << j
            bits.append(acc)
        return cls(nr, nc, bits)

    def get(self, i: int, j: int) -> int:
        return (self.row_bits[i] >> j) & 1

    def to_rows(self) -> list[list[int]]:
        return [[(bits >> j) & 1 for j in range(self.cols)] for bits in self.row_bits]

    def row_ones(self, i: int) -> list[int]:
        """Column indices of the 1-entries in row ``i``."""
        bits = self.row_bits[i]
        out = []
        j = 0
        while bits:
            if bits & 1:
                out.append(j)
            bits >>= 1
            j += 1
        return out

    def nonzero_count(self) -> int:
        return sum(bits.bit_count() for bits in self.row_bits)

    def transpose(self) -> "BitMatrix":
        cols = [0] * self.cols
        for i, bits in enumerate(self.row_bits):
            while bits:
                low = bits & -bits
                cols[low.bit_length() - 1] |= 1 << i
                bits ^= low
        return BitMatrix(self.cols, self.rows, cols)

    def to_strings(self) -> list[str]:
        """Row-major '0'/'1' strings (column 0 first) for serialization."""
        return [
            "".join("1" if (bits >> j) & 1 else "0" for j in range(self.cols))
            for bits in self.row_bits
        ]

    @classmethod
    def from_strings(cls, rows: int, cols: int, strings: list[str]) -> "BitMatrix":
        if len(strings) != rows:
            raise ValueError("row count mismatch")
        bits = []
        for s in strings:
            if len(s) != cols or set(s) - {"0", "1"}:
                raise ValueError(f"bad bit string {s!r}")
            bits.append(sum(1 << j for j, ch in enumerate(s) if ch == "1"))
        return cls(rows, cols, bits)


def gf2_rank(m: BitMatrix) -> int:
    """Rank over GF(2) by Gaussian elimination on row bitsets."""
    rows = list(m.row_bits)
    rank = 0
    for col in range(m.cols):
        pivot = None
        for i in range(rank, len(rows)):
            if (rows[i] >> col) & 1:
                pivot = i
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and (rows[i] >> col) & 1:
                rows[i] ^= rows[rank]
        rank += 1
        if rank == len(rows):
            break
    return rank


def gf2_invert(m: BitMatrix) -> BitMatrix:
    """Inverse over GF(2).  Raises :class:`SingularMatrixError` if singular."""
    if m.rows != m.cols:
        raise SingularMatrixError("only square matrices can be inverted")
    dim = m.rows
    work = list(m.row_bits)
    inv = [1 << i for i in range(dim)]
    for col in range(dim):
        pivot = None
        for i in range(col, dim):
            if (work[i] >> col) & 1:
                pivot = i
                break
        if pivot is None:
            raise SingularMatrixError("matrix is singular over GF(2)")
        work[col], work[pivot] = work[pivot], work[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        for i in range(dim):
            if i != col and (work[i] >> col) & 1:
                work[i] ^= work[col]
                inv[i] ^= inv[col]
    return BitMatrix(dim, dim, inv)


def gf2_mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Product over GF(2)."""
    if a.cols != b.rows:
        raise ValueError("dimension mismatch")
    out = []
    for i in range(a.rows):
        bits = a.row_bits[i]
        acc = 0
        while bits:
            low = bits & -bits
            acc ^= b.row_bits[low.bit_length() - 1]
            bits ^= low
        out.append(acc)
    return BitMatrix(a.rows, b.cols, out)


def gf2_mat_vec(m: BitMatrix, vec: list[int]) -> list[int]:
    """Matrix-vector product over GF(2); ``vec`` is a 0/1 list."""
    if len(vec) != m.cols:
        raise ValueError("dimension mismatch")
    packed = 0
    for j, entry in enumerate(vec):
        if entry:
            packed |= 1 << j
    return [(m.row_bits[i] & packed).bit_count() & 1 for i in range(m.rows)]


def int_mat_mul(r: BitMatrix, a: list[list[int]]) -> list[list[int]]:
    """Ordinary integer product of a 0/1 matrix with an integer matrix.

    This is NOT reduced mod 2: ``[[1, 1]] x [[1], [-1]] = [[0]]`` by
    cancellation.  Entry magnitudes are bounded by ``r.cols * max|a|``.
    """
    if not a or r.cols != len(a):
        raise ValueError("dimension mismatch")
    width = len(a[0])
    out = []
    for i in range(r.rows):
        acc = [0] * width
        for k in r.row_ones(i):
            row = a[k]
            for j in range(width):
                acc[j] += row[j]
        out.append(acc)
    return out


def int_mat_vec(r: BitMatrix, v: list[int]) -> list[int]:
    """Integer matrix-vector product of a 0/1 matrix with an integer vector."""
    if r.cols != len(v):
        raise ValueError("dimension mismatch")
    return [sum(v[k] for k in r.row_ones(i)) for i in range(r.rows)]


def _as_rng(seed: int | random.Random) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


def random_full_rank(dim: int, seed: int | random.Random) -> BitMatrix:
    """Uniform random ``dim`` x ``dim`` 0/1 matrix with full GF(2) rank.

    Full GF(2) rank forces an odd integer determinant, so the matrix is
    also invertible over the rationals — both multiplication semantics used
    by the randomizers are covered by the one condition.  Deterministic
    given the seed.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = _as_rng(seed)
    for _ in range(MAX_RANK_RETRIES):
        m = BitMatrix(dim, dim, [rng.getrandbits(dim) for _ in range(dim)])
        if gf2_rank(m) == dim:
            return m
    raise RankSamplingError(
        f"no full-rank {dim}x{dim} matrix in {MAX_RANK_RETRIES} draws"
    )


def random_sparse_full_rank(
    dim: int, row_weight: int, seed: int | random.Random
) -> BitMatrix:
    """Random full-rank matrix with at most ``row_weight`` ones per row.

    Built as a random permutation matrix plus up to ``row_weight - 1`` extra
    random bits per row, re-tested for rank; total nonzeros stay linear in
    ``dim``.  Raises :class:`RankSamplingError` when the budget runs out
    (raise ``row_weight`` and retry).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if row_weight < 1:
        raise ValueError("row_weight must be >= 1")
    rng = _as_rng(seed)
    for _ in range(MAX_RANK_RETRIES):
        perm = list(range(dim))
        rng.shuffle(perm)
        bits = []
        for i in range(dim):
            row = 1 << perm[i]
            extra = rng.randint(0, row_weight - 1)
            for _ in range(extra):
                row |= 1 << rng.randrange(dim)
            bits.append(row)
        m = BitMatrix(dim, dim, bits)
        if all(b.bit_count() <= row_weight for b in bits) and gf2_rank(m) == dim:
            return m
    raise RankSamplingError(
        f"no full-rank weight-{row_weight} matrix in {MAX_RANK_RETRIES} draws"
    )
