"""Two-level Cretan matrices from SBIBDs.

Replacing the ones of an SBIBD(v, k, lambda) incidence matrix by x = 1 and the
zeros by y gives a matrix S with

    S S^T = omega I,   omega = k + (v - k) y^2,

exactly when y solves the characteristic equation

    lambda + 2 (k - lambda) y + (v - 2k + lambda) y^2 = 0.

Because lambda (v - 1) = k (k - 1), the discriminant of that quadratic reduces
to k - lambda, so both roots lie in Q(sqrt(k - lambda)) and everything here is
computed exactly with :class:`~cretanlab.qfield.QuadExt`. The complementary
design has the same k - lambda and supplies a second pair of candidates.
"""

from __future__ import annotations

import dataclasses
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import designs
from .designs import DesignParams, IncidenceMatrix
from .errors import (
    DegenerateParams,
    InadmissibleRoot,
    NoDesignAvailable,
    NotVerifiedDesign,
    ParamsInvalid,
)
from .qfield import QuadExt, as_quad

__all__ = [
    "CharacteristicSolution",
    "CretanMatrix",
    "Determinant",
    "ExactReport",
    "BranchOutcome",
    "solve_characteristic",
    "build_cretan",
    "determinant",
    "verify_exact",
    "enumerate_branches",
    "all_solutions",
    "classify",
    "hadamard_family_design",
    "hadamard_family_cretan",
    "discriminant",
]

ORIGINAL, COMPLEMENT = "original", "complement"
CLASSIFICATIONS = ("both-original", "both-complement", "one-each")


def discriminant(params: DesignParams) -> int:
    """Reduced discriminant ``(k - lambda)^2 - lambda (v - 2k + lambda)``."""
    v, k, lam = params.v, params.k, params.lam
    return (k - lam) ** 2 - lam * (v - 2 * k + lam)


@dataclass(frozen=True)
class CharacteristicSolution:
    y: QuadExt
    params: DesignParams
    source: str = ORIGINAL
    branch: str = "minus"

    x = 1

    @property
    def admissible(self) -> bool:
        return abs(self.y) <= 1

    def residual(self) -> QuadExt:
        """Left side of the characteristic equation at (1, y); exactly zero for a root."""
        v, k, lam = self.params.v, self.params.k, self.params.lam
        y = self.y
        return lam + 2 * (k - lam) * y + (v - 2 * k + lam) * y * y


def solve_characteristic(params: DesignParams, source: str = ORIGINAL) -> tuple[CharacteristicSolution, ...]:
    """Roots of the characteristic equation with x = 1, as ``(minus, plus)``.

    When ``v - 2k + lambda == 0`` the equation is linear and a single root,
    tagged ``"linear"``, is returned.
    """
    v, k, lam = params.v, params.k, params.lam
    b = k - lam
    if b == 0:
        raise DegenerateParams(f"k = lambda for {params}: characteristic equation collapses")
    params.validate()
    a = v - 2 * k + lam
    if a == 0:
        y = QuadExt(Fraction(-lam, 2 * b))
        return (CharacteristicSolution(y, params, source, "linear"),)
    disc = discriminant(params)
    assert disc == b, f"discriminant identity fails for {params}"
    minus = QuadExt(Fraction(-b, a), Fraction(-1, a), b)
    plus = QuadExt(Fraction(-b, a), Fraction(1, a), b)
    return (
        CharacteristicSolution(minus, params, source, "minus"),
        CharacteristicSolution(plus, params, source, "plus"),
    )


class Determinant(NamedTuple):
    weight: QuadExt
    det_float: float
    exact: QuadExt | None  # omega^(v/2), only for even v


@dataclass(frozen=True)
class CretanMatrix:
    """A matrix stored as a level table plus a grid of level indices."""

    order: int
    levels: tuple[QuadExt, ...]
    index: tuple[tuple[int, ...], ...]
    weight: QuadExt
    params: DesignParams | None = None
    source: str | None = None
    branch: str | None = None
    classification: str | None = None

    @classmethod
    def from_entries(cls, entries, weight, **provenance) -> CretanMatrix:
        table: dict[QuadExt, int] = {}
        index = []
        for row in entries:
            index.append(tuple(table.setdefault(as_quad(e), len(table)) for e in row))
        return cls(len(index), tuple(table), tuple(index), as_quad(weight), **provenance)

    @property
    def entries(self) -> list[list[QuadExt]]:
        return [[self.levels[t] for t in row] for row in self.index]

    @property
    def level_counts(self) -> list[tuple[QuadExt, int]]:
        c = Counter(t for row in self.index for t in row)
        return [(value, c[t]) for t, value in enumerate(self.levels)]

    @property
    def det_float(self) -> float:
        return float(self.weight) ** (self.order / 2)

    def with_entry(self, i: int, j: int, value) -> CretanMatrix:
        grid = self.entries
        grid[i][j] = as_quad(value)
        return CretanMatrix.from_entries(
            grid, self.weight, params=self.params, source=self.source, branch=self.branch
        )

    def to_float(self) -> np.ndarray:
        table = np.array([float(x) for x in self.levels])
        return table[np.array(self.index, dtype=np.int64)]

    def problems(self) -> list[str]:
        """Violations of the entry-level Cretan conditions (not orthogonality)."""
        out = []
        for value in self.levels:
            if abs(value) > 1:
                out.append(f"level {value} has modulus > 1")
        if 1 in self.levels:
            one = self.levels.index(QuadExt(1))
            idx = np.array(self.index)
            if not (idx == one).any(axis=1).all():
                out.append("some row has no entry equal to 1")
            if not (idx == one).any(axis=0).all():
                out.append("some column has no entry equal to 1")
        else:
            out.append("no entry equals 1")
        return out


def build_cretan(B: IncidenceMatrix, sol: CharacteristicSolution) -> CretanMatrix:
    """Ones of ``B`` become 1, zeros become ``sol.y``."""
    if sol.params != B.params:
        raise ValueError(f"root was solved for {sol.params}, design has {B.params}")
    if not designs.verify_sbibd(B).passed:
        raise NotVerifiedDesign(f"{B.params} does not pass SBIBD verification")
    if not sol.admissible:
        raise InadmissibleRoot(f"|y| = {abs(sol.y)} exceeds 1")
    v, k = B.params.v, B.params.k
    index = tuple(tuple(0 if c else 1 for c in row) for row in B.cells.tolist())
    weight = k + (v - k) * sol.y * sol.y
    return CretanMatrix(
        v, (QuadExt(1), sol.y), index, weight, params=B.params, source=sol.source, branch=sol.branch
    )


def determinant(cm: CretanMatrix) -> Determinant:
    """``|det| = omega^(v/2)``; the exact power is given when v is even."""
    exact = cm.weight ** (cm.order // 2) if cm.order % 2 == 0 else None
    return Determinant(cm.weight, cm.det_float, exact)


@dataclass
class ExactReport:
    offdiag_defects: list[tuple[int, int, QuadExt]]
    diag_defects: list[tuple[int, QuadExt]]
    column_offdiag_defects: list[tuple[int, int, QuadExt]]
    column_diag_defects: list[tuple[int, QuadExt]]
    entry_problems: list[str]

    @property
    def passed(self) -> bool:
        """Exact row and column orthogonality with the claimed weight."""
        return not (
            self.offdiag_defects
            or self.diag_defects
            or self.column_offdiag_defects
            or self.column_diag_defects
        )

    @property
    def is_cretan(self) -> bool:
        return self.passed and not self.entry_problems

    @property
    def defect_count(self) -> int:
        return len(self.offdiag_defects) + len(self.diag_defects)


def _exact_gram(levels: tuple[QuadExt, ...], idx: np.ndarray):
    """Exact ``S S^T`` as integer numerators over a common denominator.

    Row i dotted with row l is a sum over level pairs (a, b) of
    ``levels[a] * levels[b]`` times the number of columns where row i holds
    level a and row l holds level b; those counts are integer matrix products.
    """
    d = 1
    for x in levels:
        if not x.is_rational():
            d = x.radicand
    prods = {(a, b): levels[a] * levels[b] for a in range(len(levels)) for b in range(len(levels))}
    denom = 1
    for p in prods.values():
        denom = math.lcm(denom, p.rational_part.denominator, p.radical_part.denominator)
    onehot = [(idx == a).astype(np.int64) for a in range(len(levels))]
    n = idx.shape[0]
    rat = np.zeros((n, n), dtype=object)
    rad = np.zeros((n, n), dtype=object)
    for (a, b), p in prods.items():
        counts = (onehot[a] @ onehot[b].T).astype(object)
        ra = int(p.rational_part * denom)
        rb = int(p.radical_part * denom)
        if ra:
            rat = rat + counts * ra
        if rb:
            rad = rad + counts * rb
    return rat, rad, denom, d


def _defects(levels, idx, weight):
    rat, rad, denom, d = _exact_gram(levels, idx)
    n = idx.shape[0]
    off, diag = [], []
    mask = (rat != 0) | (rad != 0)
    for i, j in zip(*np.nonzero(mask)):
        if i != j:
            off.append((int(i), int(j), QuadExt(Fraction(rat[i, j], denom), Fraction(rad[i, j], denom), d)))
    for i in range(n):
        value = QuadExt(Fraction(rat[i, i], denom), Fraction(rad[i, i], denom), d)
        if value != weight:
            diag.append((i, value))
    return off, diag


def verify_exact(cm: CretanMatrix) -> ExactReport:
    """Exact check of ``S S^T = S^T S = omega I`` in Q(sqrt(d)); no tolerance."""
    idx = np.array(cm.index, dtype=np.int64)
    off, diag = _defects(cm.levels, idx, cm.weight)
    coff, cdiag = _defects(cm.levels, idx.T, cm.weight)
    return ExactReport(off, diag, coff, cdiag, cm.problems())


@dataclass(frozen=True)
class BranchOutcome:
    solution: CharacteristicSolution
    matrix: CretanMatrix | None
    reason: str | None = None

    @property
    def accepted(self) -> bool:
        return self.matrix is not None


def enumerate_branches(B: IncidenceMatrix) -> list[BranchOutcome]:
    """Try every root on the design and on its complement, recording why any is rejected."""
    report = designs.verify_sbibd(B)
    if not report.passed:
        raise NotVerifiedDesign(f"{B.params} does not pass SBIBD verification: {report.summary()}")
    outcomes = []
    for design, source in ((B, ORIGINAL), (designs.complement(B), COMPLEMENT)):
        try:
            sols = solve_characteristic(design.params, source)
        except DegenerateParams as exc:
            outcomes.append(BranchOutcome(CharacteristicSolution(QuadExt(0), design.params, source, "none"), None, str(exc)))
            continue
        for sol in sols:
            if not sol.admissible:
                reason = f"|y| = {float(abs(sol.y)):.6g} > 1"
                outcomes.append(BranchOutcome(sol, None, reason))
            elif sol.y == 0:
                # y = 0 leaves the 0/1 design itself with a single level
                outcomes.append(BranchOutcome(sol, None, "y = 0 collapses to one level"))
            else:
                outcomes.append(BranchOutcome(sol, build_cretan(design, sol)))
    return outcomes


def classify(matrices) -> str | None:
    sources = {m.source for m in matrices}
    if not sources:
        return None
    if sources == {ORIGINAL}:
        return "both-original"
    if sources == {COMPLEMENT}:
        return "both-complement"
    return "one-each"


def all_solutions(B: IncidenceMatrix, params: DesignParams | None = None) -> list[CretanMatrix]:
    """Every admissible two-level Cretan matrix from ``B`` and its complement.

    Each result carries the classification of the whole set: whether the
    solutions come from the design, from its complement, or from both.
    """
    if params is not None and params != B.params:
        raise ParamsInvalid(f"design has parameters {B.params}, expected {params}")
    found = [o.matrix for o in enumerate_branches(B) if o.accepted]
    label = classify(found)
    return [dataclasses.replace(m, classification=label) for m in found]


def hadamard_family_design(t: int, budget: int = designs.DEFAULT_BUDGET) -> IncidenceMatrix:
    """An SBIBD(4t - 1, 2t - 1, t - 1) from whichever catalog family covers it."""
    if t < 1:
        raise NoDesignAvailable(f"t must be positive, got {t}")
    v = 4 * t - 1
    params = DesignParams(v, 2 * t - 1, t - 1)
    if designs.is_prime(v):
        return designs.develop(designs.qr_family(v))
    p = math.isqrt(v + 1) - 1
    if p * (p + 2) == v and designs.is_prime(p) and designs.is_prime(p + 2):
        return designs.develop(designs.twin_prime_family(p))
    if (v + 1) & v == 0:
        return designs.sylvester_family((v + 1).bit_length() - 1)
    if v <= designs.MAX_SEARCH_ORDER:
        ds = designs.find_difference_set(params, budget)
        if ds is not None:
            return designs.develop(ds)
    raise NoDesignAvailable(f"no SBIBD{params} available in the catalog")


def hadamard_family_cretan(t: int) -> list[CretanMatrix]:
    B = hadamard_family_design(t)
    minus, plus = solve_characteristic(B.params)
    expected = (QuadExt(-1, Fraction(-1, t), t), QuadExt(-1, Fraction(1, t), t))
    if (minus.y, plus.y) != expected:
        raise AssertionError(f"roots {minus.y}, {plus.y} differ from (-t -+ sqrt(t))/t for t={t}")
    return all_solutions(B)
