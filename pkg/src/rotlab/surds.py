"""Exact arithmetic in Q-linear spans of square roots of integers.

Elements are finite sums  sum_d  c_d * sqrt(d)  with rational c_d and d a
squarefree positive integer (d = 1 carries the rational part).  Distinct
squarefree roots are linearly independent over Q, so this representation is
faithful: equality, rationality and rank questions are decided exactly, with
no tolerances.  Products reduce via sqrt(a)*sqrt(b) = s*sqrt(d0) where
a*b = s^2*d0, and inverses are obtained by solving a linear system over Q in
the multiplicatively closed span, so the represented set is a genuine field.

This backs the rationally-independent ("totally irrational") tests on
homology vectors and the construction of rational-combination witnesses.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class NotIndependent(ValueError):
    """The two vectors are proportional; no witness combination exists."""


class NotApplicable(ValueError):
    """No exactly invertible 2x2 minor is available in the represented field."""


def _squarefree(n: int) -> tuple[int, int]:
    """Return (s, d) with n = s^2 * d and d squarefree.  n >= 1."""
    if n < 1:
        raise ValueError("square roots of non-positive integers unsupported")
    s, d, p = 1, 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    return s, d * n


class Surd:
    """Exact element of a Q-span of square roots, immutable."""

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        clean = {}
        for d, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                clean[int(d)] = c
        self._terms = clean

    @classmethod
    def rational(cls, value) -> "Surd":
        return cls({1: Fraction(value)})

    @classmethod
    def root(cls, d: int, coeff=1) -> "Surd":
        s, d0 = _squarefree(int(d))
        return cls({d0: Fraction(coeff) * s})

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(d == 1 for d in self._terms)

    def rational_part(self) -> Fraction:
        return self._terms.get(1, Fraction(0))

    def __add__(self, other) -> "Surd":
        other = _coerce(other)
        out = dict(self._terms)
        for d, c in other._terms.items():
            out[d] = out.get(d, Fraction(0)) + c
        return Surd(out)

    __radd__ = __add__

    def __neg__(self) -> "Surd":
        return Surd({d: -c for d, c in self._terms.items()})

    def __sub__(self, other) -> "Surd":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Surd":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "Surd":
        other = _coerce(other)
        out: dict[int, Fraction] = {}
        for da, ca in self._terms.items():
            for db, cb in other._terms.items():
                s, d0 = _squarefree(da * db)
                out[d0] = out.get(d0, Fraction(0)) + ca * cb * s
        return Surd(out)

    __rmul__ = __mul__

    def inverse(self) -> "Surd":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero surd")
        if self.is_rational():
            return Surd.rational(1 / self.rational_part())
        basis = _closure(self.support | {1})
        size = len(basis)
        index = {d: i for i, d in enumerate(basis)}
        # columns: representation of self * sqrt(b) in the closed basis
        mat = [[Fraction(0)] * size for _ in range(size)]
        for j, b in enumerate(basis):
            prod = self * Surd.root(b)
            for d, c in prod._terms.items():
                mat[index[d]][j] = c
        rhs = [Fraction(0)] * size
        rhs[index[1]] = Fraction(1)
        sol = _solve_fraction_system(mat, rhs)
        if sol is None:  # pragma: no cover - nonzero field elements are units
            raise ZeroDivisionError("surd is not invertible in its span")
        return Surd({b: sol[i] for i, b in enumerate(basis)})

    def __truediv__(self, other) -> "Surd":
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other) -> "Surd":
        return _coerce(other) * self.inverse()

    def __eq__(self, other) -> bool:
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __float__(self) -> float:
        return sum(float(c) * math.sqrt(d) for d, c in self._terms.items())

    def __repr__(self):
        if self.is_zero():
            return "0"
        bits = []
        for d in sorted(self._terms):
            c = self._terms[d]
            bits.append(str(c) if d == 1 else f"{c}*sqrt({d})")
        return " + ".join(bits)


def _coerce(x) -> Surd:
    if isinstance(x, Surd):
        return x
    if isinstance(x, (int, Fraction)):
        return Surd.rational(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Surd")


def _closure(support: Iterable[int]) -> list[int]:
    """Multiplicative closure of squarefree supports, sorted, 1 first."""
    cur = set(int(d) for d in support) | {1}
    while True:
        nxt = set(cur)
        for a in cur:
            for b in cur:
                nxt.add(_squarefree(a * b)[1])
        if nxt == cur:
            return sorted(cur)
        cur = nxt


def _solve_fraction_system(mat, rhs):
    """Gaussian elimination over Fraction.  Returns None when singular."""
    n = len(mat)
    A = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


def fraction_matrix_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Exact rank over Q."""
    A = [[Fraction(x) for x in row] for row in rows]
    if not A:
        return 0
    ncols = len(A[0])
    rank, prow = 0, 0
    for col in range(ncols):
        piv = next((r for r in range(prow, len(A)) if A[r][col] != 0), None)
        if piv is None:
            continue
        A[prow], A[piv] = A[piv], A[prow]
        inv = 1 / A[prow][col]
        A[prow] = [x * inv for x in A[prow]]
        for r in range(len(A)):
            if r != prow and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[prow])]
        prow += 1
        rank += 1
        if prow == len(A):
            break
    return rank


_LABEL_RE = re.compile(r"^(?:1|sqrt(\d+))$")


def parse_basis_label(label: str) -> int:
    m = _LABEL_RE.match(label.strip())
    if not m:
        raise ValueError(f"unrecognized basis label {label!r}; use '1' or 'sqrtN'")
    return 1 if m.group(1) is None else int(m.group(1))


@dataclass(frozen=True)
class IrrationalVector:
    """Vector of exact surd components, used for homology rotation vectors."""

    components: tuple[Surd, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "components", tuple(_coerce(c) for c in self.components)
        )

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i) -> Surd:
        return self.components[i]

    @classmethod
    def from_json(cls, payload: dict) -> "IrrationalVector":
        """Build from {"basis": ["1","sqrt2",...], "coeffs": [[[num,den],...], ...]}.

        Each coeffs row holds one component as [num, den] pairs matching the
        basis labels in order.
        """
        roots = [parse_basis_label(lbl) for lbl in payload["basis"]]
        comps = []
        for row in payload["coeffs"]:
            if len(row) != len(roots):
                raise ValueError("coeffs row length does not match basis")
            acc = Surd()
            for (num, den), d in zip(row, roots):
                acc = acc + Surd.root(d, Fraction(int(num), int(den)))
            comps.append(acc)
        return cls(tuple(comps))

    def basis_roots(self) -> list[int]:
        roots = {1}
        for c in self.components:
            roots |= c.support
        return sorted(roots)

    def coeff_matrix(self) -> tuple[list[int], list[list[Fraction]]]:
        """Exact m x (k+1) rational coefficient matrix over the joint basis."""
        roots = self.basis_roots()
        rows = [
            [comp._terms.get(d, Fraction(0)) for d in roots]
            for comp in self.components
        ]
        return roots, rows

    def floats(self) -> list[float]:
        return [float(c) for c in self.components]

    def scale_add(self, alpha: Surd, other: "IrrationalVector", beta: Surd):
        if len(other) != len(self):
            raise ValueError("dimension mismatch")
        return IrrationalVector(
            tuple(alpha * a + beta * b for a, b in zip(self.components, other.components))
        )

    def apply_int_matrix(self, A) -> "IrrationalVector":
        """Image under an integer matrix acting on components (basis change)."""
        m = len(self.components)
        rows = [list(map(int, r)) for r in A]
        if len(rows) != m or any(len(r) != m for r in rows):
            raise ValueError("matrix shape must match vector length")
        comps = []
        for r in rows:
            acc = Surd()
            for a, c in zip(r, self.components):
                acc = acc + Surd.rational(a) * c
            comps.append(acc)
        return IrrationalVector(tuple(comps))


def totally_irrational_check(v: IrrationalVector) -> bool:
    """True iff no nonzero rational vector q satisfies sum_i q_i v_i = 0.

    Exact: the rational coefficient matrix of the components must have full
    row rank over Q.
    """
    _, rows = v.coeff_matrix()
    return fraction_matrix_rank(rows) == len(v)


def rationality_obstruction(v1: IrrationalVector, v2: IrrationalVector):
    """Witness that two independent totally irrational vectors in R^3 mix to
    a vector with two exactly rational coordinates.

    Solves alpha*v1 + beta*v2 = (1, 1, Q3) exactly using an invertible 2x2
    minor of the component matrix; the witness w = alpha*v1 + beta*v2 is
    returned along with (alpha, beta) and always fails
    totally_irrational_check.  Raises NotIndependent when v1 and v2 are
    proportional and NotApplicable when no minor is invertible in the
    represented field.
    """
    if len(v1) != 3 or len(v2) != 3:
        raise ValueError("rationality_obstruction expects vectors in R^3")
    if not totally_irrational_check(v1) or not totally_irrational_check(v2):
        raise ValueError("both vectors must be totally irrational")

    pairs = [(0, 1), (0, 2), (1, 2)]
    dets = {}
    for i, j in pairs:
        dets[(i, j)] = v1[i] * v2[j] - v1[j] * v2[i]
    if all(d.is_zero() for d in dets.values()):
        raise NotIndependent("vectors are proportional")

    for (i, j), det in dets.items():
        if det.is_zero():
            continue
        try:
            inv = det.inverse()
        except ZeroDivisionError:  # pragma: no cover - field elements invert
            continue
        one = Surd.rational(1)
        # [[a1, a2], [b1, b2]]^{-1} @ (1, 1) via the adjugate
        alpha = inv * (v2[j] * one - v2[i] * one)
        beta = inv * (v1[i] * one - v1[j] * one)
        w = v1.scale_add(alpha, v2, beta)
        return alpha, beta, w
    raise NotApplicable("no invertible 2x2 minor in the represented field")
