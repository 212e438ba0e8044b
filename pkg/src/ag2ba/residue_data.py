"""Closed-form residues of paired coefficients along pole hyperplanes.

Each entry records the operator, the pair (tau, lambda), the root alpha and c
of the hyperplane <alpha, z> = c alpha^2, and the residue of a_tau as a
rational function of the surviving coordinate X (A = <alpha1, z> on short-root
hyperplanes, B = <beta1, z> on long-root ones).  Numerator factors are
(X + c0 + c1*m)^k, denominator factors (X + c0)^k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .exact import AffineForm, FactoredRatFun, MultiPoly
from .lattice import A1, A2, A3, B1, B2, LatticeVector


@dataclass(frozen=True)
class ResidueFormula:
    key: str
    operator: str
    tau: LatticeVector
    lam: LatticeVector
    alpha: LatticeVector
    c: int
    scalar: Callable[[int], int]
    numerator: tuple[tuple[int, int, int], ...]
    denominator: tuple[tuple[int, int], ...]
    m_degree: int

    def evaluate(self, m: int) -> FactoredRatFun:
        num = MultiPoly.constant(self.scalar(m), 1)
        for c0, c1, k in self.numerator:
            num = num * MultiPoly.linear([1], c0 + c1 * m) ** k
        den = {}
        for c0, k in self.denominator:
            f = AffineForm([1], c0)
            den[f] = den.get(f, 0) + k
        return FactoredRatFun(num, den)


FORMULAS: tuple[ResidueFormula, ...] = (
    ResidueFormula(
        "D1:B=4", "D1", -2 * B2, -2 * A3, B1, 2,
        lambda m: -3 * m * (3 * m + 2) * (3 * m + 4),
        ((-12, -12, 1), (0, 6, 1), (-4, 12, 1), (0, 12, 1), (4, 12, 1), (12, 12, 2)),
        ((-12, 1), (-4, 1), (0, 3), (4, 1), (12, 1)),
        3,
    ),
    ResidueFormula(
        "D1:B=2", "D1", 2 * B2, 2 * A2, B1, 1,
        lambda m: 6 * (m + 1) * (3 * m - 1) * (3 * m + 1),
        ((-10, -12, 1), (-6, -12, 1), (-2, -12, 1), (6, -12, 2), (0, -6, 1), (6, 12, 1)),
        ((-6, 1), (-2, 1), (0, 1), (2, 1), (6, 3)),
        3,
    ),
    ResidueFormula(
        "D2:B=6", "D2", -4 * B1, -2 * B1, B1, 3,
        lambda m: 48 * m * (m + 1) * (3 * m + 2) * (3 * m + 5),
        ((-2, -12, 1), (-6, -12, 1), (-14, -12, 1), (-18, -12, 1), (2, 12, 1), (6, 12, 1), (14, 12, 1), (18, 12, 1)),
        ((-18, 1), (-6, 2), (-2, 1), (2, 1), (6, 2), (18, 1)),
        4,
    ),
    ResidueFormula(
        "D2:B=4", "D2", -2 * B2, -2 * A3, B1, 2,
        lambda m: -18 * m * m * (m + 1) * (3 * m + 2) * (3 * m + 4),
        ((-32, 0, 1), (24, 0, 1), (-12, -12, 1), (0, 6, 1), (-4, 12, 1), (0, 12, 1), (4, 12, 1), (12, 12, 2)),
        ((-12, 1), (-8, 1), (-4, 1), (0, 4), (4, 1), (12, 1)),
        5,
    ),
    ResidueFormula(
        "D2:B=2:-4b1", "D2", -4 * B1, 2 * B1, B1, 1,
        lambda m: 144 * m * (m + 1) * (3 * m - 2) * (3 * m + 1),
        ((6, -12, 1), (2, -12, 1), (-6, -12, 1), (-10, -12, 1), (-6, 12, 1), (-2, 12, 1), (6, 12, 1), (10, 12, 1)),
        ((-6, 2), (-2, 2), (2, 2), (6, 2)),
        4,
    ),
    ResidueFormula(
        "D2:B=2:-4b2", "D2", -4 * B2, -2 * A1, B1, 1,
        lambda m: 288 * m * (m + 1),
        ((-6, 6, 1), (0, 6, 1), (-10, 12, 1), (-6, 12, 2), (-2, 12, 1), (2, 12, 1), (6, 12, 2), (10, 12, 1)),
        ((-10, 1), (-6, 4), (-2, 2), (0, 1), (2, 1), (6, 1)),
        2,
    ),
    ResidueFormula(
        "D2:B=2:2b2", "D2", 2 * B2, 2 * A2, B1, 1,
        lambda m: 36 * m * (m + 1) ** 2 * (3 * m - 1) * (3 * m + 1),
        ((-26, 0, 1), (30, 0, 1), (-10, -12, 1), (-6, -12, 1), (-2, -12, 1), (6, -12, 2), (0, -6, 1), (6, 12, 1)),
        ((-6, 1), (-2, 2), (0, 1), (2, 1), (6, 4)),
        5,
    ),
    ResidueFormula(
        "D2:A=6", "D2", -4 * B2, -2 * B1, A1, 1,
        lambda m: 96 * m * (m + 1),
        ((-14, -12, 1), (-2, -12, 1), (-2, 4, 1), (2, 4, 1), (-2, 6, 1), (4, 6, 1), (-6, 12, 1), (2, 12, 1), (6, 12, 1), (14, 12, 1)),
        ((-6, 2), (-2, 4), (0, 1), (2, 2), (6, 1)),
        2,
    ),
)


def formulas_for(operator: str) -> list[ResidueFormula]:
    return [f for f in FORMULAS if f.operator == operator.upper()]


def m_values(formula: ResidueFormula) -> list[int]:
    """Enough m values to pin down a polynomial identity in m of the formula's degree."""
    # the m-dependence of the numerator factors adds to the scalar's degree
    total = formula.m_degree + sum(k for _, c1, k in formula.numerator if c1)
    return list(range(1, total + 2))

