"""Vectors of the AG2 configuration in the lattice Z*beta1 + Z*alpha2.

Coordinates are integer pairs (a, b) meaning a*beta1 + b*alpha2.  Inner
products come from the Gram matrix of that basis, so no irrational Cartesian
coordinates ever appear.  The same machinery serves the standard-basis
configurations of the reductions module (identity Gram matrix).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exact import AffineForm, MultiPoly, as_fraction

Matrix = tuple[tuple[Fraction, ...], ...]

GRAM: Matrix = ((Fraction(2), Fraction(-3)), (Fraction(-3), Fraction(6)))
GRAM_INV: Matrix = ((Fraction(2), Fraction(1)), (Fraction(1), Fraction(2, 3)))


@dataclass(frozen=True, order=True)
class LatticeVector:
    coords: tuple

    def __init__(self, *coords):
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        object.__setattr__(self, "coords", tuple(_norm(c) for c in coords))

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(*(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(*(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(*(-a for a in self.coords))

    def __mul__(self, c) -> "LatticeVector":
        return LatticeVector(*(c * a for a in self.coords))

    __rmul__ = __mul__

    def __iter__(self):
        return iter(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coords]

    def __repr__(self) -> str:
        return f"LatticeVector{self.coords}"


def _norm(c):
    c = as_fraction(c)
    return int(c) if c.denominator == 1 else c


B1, B2, B3 = LatticeVector(1, 0), LatticeVector(2, 1), LatticeVector(1, 1)
A1, A2, A3 = LatticeVector(3, 2), LatticeVector(0, 1), LatticeVector(3, 1)
BETAS = (B1, B2, B3)
ALPHAS = (A1, A2, A3)
G2_POSITIVE = BETAS + ALPHAS


def identity_gram(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def mat_vec(mat: Matrix, v: Sequence) -> tuple[Fraction, ...]:
    return tuple(sum(as_fraction(mat[i][j]) * as_fraction(v[j]) for j in range(len(v))) for i in range(len(mat)))


def gram_inner(v: LatticeVector, w: LatticeVector, gram: Matrix = GRAM) -> Fraction:
    """v^T * Gram * w."""
    gw = mat_vec(gram, w.coords)
    return sum(as_fraction(a) * b for a, b in zip(v.coords, gw))


def norm2(v: LatticeVector, gram: Matrix = GRAM) -> Fraction:
    return gram_inner(v, v, gram)


def u_shift(v: LatticeVector, gram: Matrix = GRAM) -> tuple[Fraction, ...]:
    """Change of the coordinates u_j = <b_j, z> under z -> z + v."""
    return mat_vec(gram, v.coords)


def e_exponent(v: LatticeVector, gram: Matrix = GRAM) -> tuple[int, ...]:
    """Exponent of exp<x, v> in the variables E_j = exp(y_j), x = sum y_j b_j."""
    e = mat_vec(gram, v.coords)
    if any(c.denominator != 1 for c in e):
        raise ValueError(f"{v} does not give an integral exponent")
    return tuple(int(c) for c in e)


def u_form(v: LatticeVector, constant=0) -> AffineForm:
    """The affine form <v, z> + constant in u-coordinates."""
    return AffineForm(v.coords, constant)


def coord_dictionaries(v: LatticeVector, gram: Matrix = GRAM) -> dict:
    return {"uForm": u_form(v), "eExponent": e_exponent(v, gram)}


def reflect(gamma: LatticeVector, v: LatticeVector, gram: Matrix = GRAM) -> LatticeVector:
    """s_gamma(v) = v - 2<gamma,v>/<gamma,gamma> * gamma."""
    return v - gamma * (2 * gram_inner(gamma, v, gram) / norm2(gamma, gram))


def coroot_pairing(tau: LatticeVector, gamma: LatticeVector, gram: Matrix = GRAM) -> Fraction:
    """<tau, (2 gamma)^vee> = <tau, gamma> / gamma^2."""
    return gram_inner(tau, gamma, gram) / norm2(gamma, gram)


def z_squared(gram: Matrix = GRAM) -> MultiPoly:
    """z^2 = u^T Gram^{-1} u as a polynomial in the u-coordinates."""
    inv = _inverse(gram)
    n = len(gram)
    terms: dict[tuple, Fraction] = {}
    for i in range(n):
        for j in range(n):
            e = [0] * n
            e[i] += 1
            e[j] += 1
            terms[tuple(e)] = terms.get(tuple(e), Fraction(0)) + inv[i][j]
    return MultiPoly.from_terms(terms, n)


@lru_cache(maxsize=None)
def _inverse(gram: Matrix) -> Matrix:
    n = len(gram)
    a = [[as_fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(gram)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def gram_inverse(gram: Matrix = GRAM) -> Matrix:
    return _inverse(gram)


# ------------------------------------------------------------- Weyl group


@dataclass(frozen=True)
class WeylElement:
    lattice_action: tuple[tuple[int, int], tuple[int, int]]
    u_action: Matrix
    length: int
    det: int

    def apply(self, v: LatticeVector) -> LatticeVector:
        return LatticeVector(*mat_vec(self.lattice_action, v.coords))

    def u_matrix_inverse(self) -> Matrix:
        """Matrix of u -> u(w^{-1} z), used to compute (w f)(z) = f(w^{-1} z)."""
        return _inverse(self.u_action)


def _reflection_matrix(gamma: LatticeVector) -> tuple:
    cols = [reflect(gamma, LatticeVector(1, 0)).coords, reflect(gamma, LatticeVector(0, 1)).coords]
    return tuple(tuple(int(cols[j][i]) for j in range(2)) for i in range(2))


def _matmul(a, b):
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n))


@lru_cache(maxsize=None)
def weyl_elements() -> tuple[WeylElement, ...]:
    """The 12 elements of W(G2), generated by the simple reflections s_beta1 and s_alpha2."""
    gens = [_reflection_matrix(B1), _reflection_matrix(A2)]
    ident = ((1, 0), (0, 1))
    seen = {ident: 0}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = _matmul(s, g)
                if h not in seen:
                    seen[h] = seen[g] + 1
                    nxt.append(h)
        frontier = nxt
    inv = _inverse(GRAM)
    out = []
    for mat, length in seen.items():
        # u = Gram * c, so the u-action is Gram * W * Gram^{-1}
        gw = tuple(tuple(Fraction(x) for x in row) for row in _matmul(GRAM, mat))
        u_act = tuple(
            tuple(sum(gw[i][k] * inv[k][j] for k in range(2)) for j in range(2)) for i in range(2)
        )
        det = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
        out.append(WeylElement(mat, u_act, length, det))
    return tuple(out)


def weyl_orbit(v: LatticeVector) -> list[LatticeVector]:
    seen: list[LatticeVector] = []
    for w in weyl_elements():
        image = w.apply(v)
        if image not in seen:
            seen.append(image)
    return seen


# ---------------------------------------------------------- configurations


@dataclass(frozen=True)
class Configuration:
    """Positive vectors with multiplicities and the shift sets of the quasi-invariance conditions."""

    name: str
    m: int
    vectors: tuple[tuple[LatticeVector, int], ...]
    axiom_sets: dict = field(hash=False, compare=False)
    gram: Matrix = GRAM

    def multiplicity(self, v: LatticeVector) -> int:
        for w, k in self.vectors:
            if w == v:
                return k
        return 0

    def reduced_positive(self) -> list[LatticeVector]:
        """Positive vectors gamma with gamma/2 not in the configuration."""
        present = {v for v, _ in self.vectors}
        return [v for v, _ in self.vectors if v * Fraction(1, 2) not in present]

    def axiom_set(self, v: LatticeVector) -> tuple[int, ...]:
        return self.axiom_sets.get(v, ())

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "m": self.m,
            "vectors": [[v.to_json(), k] for v, k in self.vectors],
            "axiomSets": [[v.to_json(), list(s)] for v, s in self.axiom_sets.items()],
            "gram": [[str(x) for x in row] for row in self.gram],
        }


def shift_set(m_gamma: int, m_double: int) -> tuple[int, ...]:
    """{1..m} together with {m+2, m+4, ..., m+2*m_double}."""
    return tuple(range(1, m_gamma + 1)) + tuple(m_gamma + 2 * t for t in range(1, m_double + 1))


def build_config(name: str, m: int) -> Configuration:
    if m < 0:
        raise ValueError("m must be a natural number")
    name = name.upper()
    if name == "AG2":
        vecs = tuple((b, 3 * m) for b in BETAS) + tuple((a, m) for a in ALPHAS) + tuple((2 * b, 1) for b in BETAS)
        sets = {b: shift_set(3 * m, 1) for b in BETAS}
        sets.update({a: shift_set(m, 0) for a in ALPHAS})
    elif name == "G2":
        # the limiting root system of AG2: short multiplicity m_beta + m_2beta
        vecs = tuple((b, 3 * m + 1) for b in BETAS) + tuple((a, m) for a in ALPHAS)
        sets = {b: shift_set(3 * m + 1, 0) for b in BETAS}
        sets.update({a: shift_set(m, 0) for a in ALPHAS})
    elif name == "A2":
        vecs = tuple((2 * b, 1) for b in BETAS)
        sets = {2 * b: shift_set(1, 0) for b in BETAS}
    else:
        raise ValueError(f"unknown configuration {name!r}")
    return Configuration(name, m, vecs, sets)


def standard_config(name: str, positive: Sequence[tuple[Sequence[int], int]], axiom_sets: dict) -> Configuration:
    """A configuration in n standard coordinates with the identity Gram matrix."""
    vecs = tuple((LatticeVector(*v), k) for v, k in positive)
    n = len(vecs[0][0])
    sets = {LatticeVector(*v): tuple(s) for v, s in axiom_sets.items()}
    return Configuration(name, 0, vecs, sets, identity_gram(n))


A_COORD = u_form(A1)
B_COORD = u_form(B1)
