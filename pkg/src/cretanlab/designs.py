"""Symmetric BIBD incidence matrices and the difference sets that generate them.

A (v, k, lambda) difference set D in Z_v develops into a circulant v x v 0/1
matrix B with ``B[i, j] = 1`` iff ``(j - i) mod v`` is in D, and B satisfies
``B @ B.T == (k - lambda) I + lambda J``. This module builds such matrices from
a few classical families, checks them, complements them and searches small
parameter sets by backtracking.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BudgetExceeded,
    InvalidDifferenceSet,
    NotPrime,
    NotTwinPrimes,
    ParamsInvalid,
    ParseError,
    UnsupportedOrder,
    WrongResidueClass,
)

__all__ = [
    "DesignParams",
    "DifferenceSet",
    "IncidenceMatrix",
    "SBIBDReport",
    "develop",
    "verify_sbibd",
    "complement",
    "qr_family",
    "twin_prime_family",
    "regular_hadamard",
    "menon_family",
    "sylvester_family",
    "find_difference_set",
    "load_difference_sets",
    "parse_difference_set_line",
    "is_prime",
    "MAX_SEARCH_ORDER",
]

MAX_SEARCH_ORDER = 40
DEFAULT_BUDGET = 2_000_000


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % f for f in range(3, math.isqrt(n) + 1, 2))


@dataclass(frozen=True)
class DesignParams:
    v: int
    k: int
    lam: int

    def problems(self) -> list[str]:
        out = []
        if not self.v > self.k >= 1:
            out.append(f"need v > k >= 1, got v={self.v}, k={self.k}")
        if self.lam < 0:
            out.append(f"lambda must be non-negative, got {self.lam}")
        if self.lam * (self.v - 1) != self.k * (self.k - 1):
            out.append(
                f"lambda(v-1) = {self.lam * (self.v - 1)} != k(k-1) = {self.k * (self.k - 1)}"
            )
        return out

    @property
    def is_valid(self) -> bool:
        return not self.problems()

    def validate(self) -> DesignParams:
        problems = self.problems()
        if problems:
            raise ParamsInvalid(f"{self}: " + "; ".join(problems))
        return self

    def complement(self) -> DesignParams:
        return DesignParams(self.v, self.v - self.k, self.v - 2 * self.k + self.lam)

    @property
    def order(self) -> int:
        """``k - lambda``, the radicand of every characteristic root."""
        return self.k - self.lam

    def as_dict(self) -> dict:
        return {"v": self.v, "k": self.k, "lambda": self.lam}

    def __str__(self) -> str:
        return f"({self.v},{self.k},{self.lam})"


def difference_counts(residues: Iterable[int], v: int) -> list[int]:
    """How often each residue mod v occurs as ``d_i - d_j`` with ``i != j``."""
    rs = list(residues)
    counts = [0] * v
    for a in rs:
        for b in rs:
            if a != b:
                counts[(a - b) % v] += 1
    return counts


@dataclass(frozen=True)
class DifferenceSet:
    params: DesignParams
    residues: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "residues", tuple(sorted(self.residues)))

    def problems(self) -> list[str]:
        v, k, lam = self.params.v, self.params.k, self.params.lam
        out = list(self.params.problems())
        rs = self.residues
        if len(set(rs)) != len(rs):
            out.append("residues are not distinct")
        if any(not 0 <= r < v for r in rs):
            out.append(f"residues must lie in [0, {v})")
        if len(rs) != k:
            out.append(f"{len(rs)} residues given, expected k={k}")
        if not out:
            counts = difference_counts(rs, v)
            bad = [d for d in range(1, v) if counts[d] != lam]
            if bad:
                out.append(
                    f"difference {bad[0]} occurs {counts[bad[0]]} times, expected {lam}"
                )
        return out

    def check(self) -> DifferenceSet:
        problems = self.problems()
        if problems:
            raise InvalidDifferenceSet(f"{self.params} {list(self.residues)}: " + "; ".join(problems))
        return self

    def translate(self, c: int) -> DifferenceSet:
        return DifferenceSet(self.params, tuple((r + c) % self.params.v for r in self.residues))

    def __str__(self) -> str:
        return f"{self.params.v} {self.params.k} {self.params.lam} : " + " ".join(map(str, self.residues))


STRUCTURE_TAGS = ("circulant", "block", "general")


@dataclass(eq=False)
class IncidenceMatrix:
    """A v x v 0/1 matrix labelled with the parameters it claims to have."""

    params: DesignParams
    cells: np.ndarray
    structure_tag: str = "general"
    source: str = field(default="", compare=False)

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int64)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError(f"incidence matrix must be square, got shape {cells.shape}")
        if not np.isin(cells, (0, 1)).all():
            raise ValueError("incidence matrix entries must be 0 or 1")
        if self.structure_tag not in STRUCTURE_TAGS:
            raise ValueError(f"unknown structure tag {self.structure_tag!r}")
        cells.setflags(write=False)
        self.cells = cells

    @property
    def v(self) -> int:
        return self.cells.shape[0]

    def __eq__(self, other):
        if not isinstance(other, IncidenceMatrix):
            return NotImplemented
        return (
            self.params == other.params
            and self.structure_tag == other.structure_tag
            and np.array_equal(self.cells, other.cells)
        )

    def __repr__(self):
        return f"IncidenceMatrix(params={self.params}, structure_tag={self.structure_tag!r})"


@dataclass
class SBIBDReport:
    params: DesignParams
    parameter_problems: list[str]
    bad_row_sums: list[int]
    bad_column_sums: list[int]
    bad_row_pairs: list[tuple[int, int]]
    bad_column_pairs: list[tuple[int, int]]
    order_matches: bool = True

    @property
    def parameter_identity(self) -> bool:
        return not self.parameter_problems

    @property
    def row_sums(self) -> bool:
        return not self.bad_row_sums

    @property
    def column_sums(self) -> bool:
        return not self.bad_column_sums

    @property
    def row_inner_products(self) -> bool:
        return not self.bad_row_pairs

    @property
    def column_inner_products(self) -> bool:
        return not self.bad_column_pairs

    @property
    def passed(self) -> bool:
        return (
            self.order_matches
            and self.parameter_identity
            and self.row_sums
            and self.column_sums
            and self.row_inner_products
            and self.column_inner_products
        )

    def summary(self) -> dict[str, bool]:
        return {
            "order": self.order_matches,
            "parameter_identity": self.parameter_identity,
            "row_sums": self.row_sums,
            "column_sums": self.column_sums,
            "row_inner_products": self.row_inner_products,
            "column_inner_products": self.column_inner_products,
            "passed": self.passed,
        }


def _bad_pairs(gram: np.ndarray, lam: int) -> list[tuple[int, int]]:
    v = gram.shape[0]
    iu = np.triu_indices(v, 1)
    bad = np.nonzero(gram[iu] != lam)[0]
    return [(int(iu[0][t]), int(iu[1][t])) for t in bad]


def verify_sbibd(B: IncidenceMatrix) -> SBIBDReport:
    """Check every defining condition of an SBIBD incidence matrix separately."""
    p = B.params
    c = B.cells
    rows = c.sum(axis=1)
    cols = c.sum(axis=0)
    return SBIBDReport(
        params=p,
        parameter_problems=p.problems(),
        bad_row_sums=[int(i) for i in np.nonzero(rows != p.k)[0]],
        bad_column_sums=[int(j) for j in np.nonzero(cols != p.k)[0]],
        bad_row_pairs=_bad_pairs(c @ c.T, p.lam),
        bad_column_pairs=_bad_pairs(c.T @ c, p.lam),
        order_matches=B.v == p.v,
    )


def develop(ds: DifferenceSet) -> IncidenceMatrix:
    ds.check()
    v = ds.params.v
    row = np.zeros(v, dtype=np.int64)
    row[list(ds.residues)] = 1
    cells = np.array([np.roll(row, i) for i in range(v)])
    return IncidenceMatrix(ds.params, cells, "circulant", source=f"difference set {list(ds.residues)}")


def complement(B: IncidenceMatrix) -> IncidenceMatrix:
    return IncidenceMatrix(
        B.params.complement(), 1 - B.cells, B.structure_tag, source=f"complement of {B.source or B.params}"
    )


def _squares_mod(p: int) -> set[int]:
    return {x * x % p for x in range(1, p)}


def qr_family(p: int) -> DifferenceSet:
    """Quadratic residues mod a prime ``p = 3 (mod 4)``: a (p, (p-1)/2, (p-3)/4) set."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p % 4 != 3:
        raise WrongResidueClass(f"{p} = {p % 4} (mod 4), need 3 (mod 4)")
    ds = DifferenceSet(DesignParams(p, (p - 1) // 2, (p - 3) // 4), tuple(_squares_mod(p)))
    return ds.check()


def twin_prime_family(p: int) -> DifferenceSet:
    """Twin prime difference set in Z_{p(p+2)}.

    Pairs (x, y) in Z_p x Z_q with x, y both nonzero squares or both nonsquares,
    together with all (x, 0), mapped into Z_{pq} by the Chinese remainder theorem.
    """
    q = p + 2
    if not (is_prime(p) and is_prime(q)):
        raise NotTwinPrimes(f"{p} and {q} are not both prime")
    if p == 2:
        raise NotTwinPrimes("2 and 4 are not twin primes")
    n = p * q
    sp, sq = _squares_mod(p), _squares_mod(q)
    residues = []
    for z in range(n):
        x, y = z % p, z % q
        if y == 0:
            residues.append(z)
        elif x != 0 and (x in sp) == (y in sq):
            residues.append(z)
    ds = DifferenceSet(DesignParams(n, (n - 1) // 2, (n - 3) // 4), tuple(residues))
    return ds.check()


_H4 = np.array([[-1, 1, 1, 1], [1, -1, 1, 1], [1, 1, -1, 1], [1, 1, 1, -1]], dtype=np.int64)


def regular_hadamard(m: int) -> np.ndarray:
    """Regular Hadamard matrix of order 4m**2 with row sums 2m.

    Available for m a power of two: the order-4 seed ``J - 2I`` and its
    Kronecker powers (row sums multiply, so the power of order 4**j has row
    sum 2**j).
    """
    if m < 1 or m & (m - 1):
        raise UnsupportedOrder(f"no regular Hadamard matrix of order {4 * m * m} in the catalog")
    H = _H4
    size = 2
    while size < 2 * m:
        H = np.kron(H, _H4)
        size *= 2
    return H


def menon_family(m: int, hadamard: np.ndarray | None = None) -> IncidenceMatrix:
    """SBIBD(4m^2, 2m^2 - m, m^2 - m) from a regular Hadamard matrix.

    The -1 entries become the ones of the design. Pass ``hadamard`` to supply a
    matrix the catalog cannot build (e.g. order 36).
    """
    if m < 1:
        raise UnsupportedOrder(f"m must be positive, got {m}")
    n = 4 * m * m
    if hadamard is None:
        H = regular_hadamard(m)
    else:
        H = np.asarray(hadamard, dtype=np.int64)
        if H.shape != (n, n) or not np.isin(H, (-1, 1)).all():
            raise UnsupportedOrder(f"supplied matrix is not a +-1 matrix of order {n}")
        if not np.array_equal(H @ H.T, n * np.eye(n, dtype=np.int64)):
            raise UnsupportedOrder("supplied matrix is not Hadamard")
        sums = H.sum(axis=1)
        if not (np.all(sums == 2 * m) or np.all(sums == -2 * m)):
            raise UnsupportedOrder(f"supplied Hadamard matrix is not regular with row sum +-{2 * m}")
        if sums[0] < 0:
            H = -H
    params = DesignParams(n, 2 * m * m - m, m * m - m)
    return IncidenceMatrix(params, (H == -1).astype(np.int64), "block", source=f"Menon m={m}")


def sylvester_family(n: int) -> IncidenceMatrix:
    """SBIBD(2^n - 1, 2^(n-1) - 1, 2^(n-2) - 1) from the core of a Sylvester matrix."""
    if n < 2:
        raise UnsupportedOrder("need a Sylvester matrix of order at least 4")
    H = np.array([[1]], dtype=np.int64)
    for _ in range(n):
        H = np.block([[H, H], [H, -H]])
    core = H[1:, 1:]
    v = 2**n - 1
    params = DesignParams(v, 2 ** (n - 1) - 1, 2 ** (n - 2) - 1)
    return IncidenceMatrix(params, (core == 1).astype(np.int64), "block", source=f"Sylvester core 2^{n}")


def find_difference_set(params: DesignParams, budget: int = DEFAULT_BUDGET) -> DifferenceSet | None:
    """Lexicographically least (v, k, lambda) difference set, or None if none exists.

    Backtracks over increasing residues with 0 fixed as the first element
    (every difference set has a translate containing 0, and the least translate
    always does). A branch is cut as soon as some difference occurs more than
    lambda times. Raises BudgetExceeded after ``budget`` search nodes.
    """
    params.validate()
    v, k, lam = params.v, params.k, params.lam
    if v > MAX_SEARCH_ORDER:
        raise ParamsInvalid(f"v={v} exceeds the search limit of {MAX_SEARCH_ORDER}")
    counts = [0] * v
    chosen = [0]
    nodes = 0

    def extend(start: int) -> bool:
        nonlocal nodes
        if len(chosen) == k:
            return True
        # the remaining slots must still fit below v
        for e in range(start, v - (k - len(chosen)) + 1):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"no result for {params} within {budget} nodes", nodes)
            touched = []
            ok = True
            for d in chosen:
                for diff in ((e - d) % v, (d - e) % v):
                    counts[diff] += 1
                    touched.append(diff)
                    if counts[diff] > lam:
                        ok = False
                if not ok:
                    break
            if ok:
                chosen.append(e)
                if extend(e + 1):
                    return True
                chosen.pop()
            for diff in touched:
                counts[diff] -= 1
        return False

    if k == 1:
        return DifferenceSet(params, (0,)).check()
    if not extend(1):
        return None
    return DifferenceSet(params, tuple(chosen)).check()


def parse_difference_set_line(line: str, lineno: int | None = None) -> DifferenceSet | None:
    """Parse ``"v k lambda : d1 d2 ... dk"``; blank and comment lines give None."""
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    head, sep, tail = text.partition(":")
    if not sep:
        raise ParseError(f"missing ':' in {line.strip()!r}", lineno)
    try:
        nums = [int(t) for t in head.split()]
        residues = tuple(int(t) for t in tail.split())
    except ValueError as exc:
        raise ParseError(f"non-integer token in {line.strip()!r}", lineno) from exc
    if len(nums) != 3:
        raise ParseError(f"expected 'v k lambda' before ':', got {head.strip()!r}", lineno)
    return DifferenceSet(DesignParams(*nums), residues)


def load_difference_sets(path: str | Path) -> list[DifferenceSet]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            ds = parse_difference_set_line(line, lineno)
            if ds is None:
                continue
            problems = ds.problems()
            if problems:
                raise InvalidDifferenceSet(f"line {lineno}: {ds.params}: " + "; ".join(problems))
            out.append(ds)
    return out
