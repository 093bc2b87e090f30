"""Exact arithmetic in cyclotomic fields Q(zeta_n) and over the integers.

Elements of Q(zeta_n) are stored as rational coefficient vectors in the power
basis 1, zeta, ..., zeta^(phi(n)-1), reduced modulo the n-th cyclotomic
polynomial.  Elements of different conductors are combined in Q(zeta_lcm).
"""

from __future__ import annotations

import ast
import cmath
import re
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence, Union

CONDUCTOR_BOUND = 24


class ConductorOverflowError(ValueError):
    pass


class SingularMatrixError(ValueError):
    pass


Number = Union[int, Fraction, "ExactScalar"]


# ---------------------------------------------------------------------------
# integer polynomial helpers (coefficients low -> high)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@lru_cache(maxsize=None)
def _divisors(n: int) -> tuple[int, ...]:
    return tuple(d for d in range(1, n + 1) if n % d == 0)


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


@lru_cache(maxsize=None)
def _mobius(n: int) -> int:
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def _poly_divmod_monic(num: list, den: Sequence[int]) -> tuple[list, list]:
    num = list(num)
    dd = len(den) - 1
    if len(num) - 1 < dd:
        return [0], num
    quot = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c == 0:
            continue
        quot[i - dd] = c
        for j in range(dd + 1):
            num[i - dd + j] -= c * den[j]
    return quot, num[:dd] if dd > 0 else [0]


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, low degree first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in _divisors(n)[:-1]:
        poly, rem = _poly_divmod_monic(poly, cyclotomic_poly(d))
        assert not any(rem)
    return tuple(int(c) for c in poly)


def _reduce(poly: Sequence, n: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    coeffs = [Fraction(c) for c in poly]
    if len(coeffs) > deg:
        _, coeffs = _poly_divmod_monic(coeffs, phi)
    coeffs = list(coeffs) + [Fraction(0)] * (deg - len(coeffs))
    return tuple(coeffs[:deg])


# ---------------------------------------------------------------------------


class ExactScalar:
    """Immutable element of Q(zeta_n)."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Iterable):
        if n < 1:
            raise ValueError("conductor must be positive")
        if n > CONDUCTOR_BOUND:
            raise ConductorOverflowError(f"conductor {n} exceeds bound {CONDUCTOR_BOUND}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", _reduce(list(coeffs), n))

    def __setattr__(self, key, value):
        raise AttributeError("ExactScalar is immutable")

    # constructors -----------------------------------------------------------
    @classmethod
    def rational(cls, q) -> "ExactScalar":
        return cls(1, [Fraction(q)])

    @classmethod
    def zeta(cls, n: int, k: int = 1) -> "ExactScalar":
        k %= n
        return cls(n, [0] * k + [1])

    @classmethod
    def coerce(cls, x: Number) -> "ExactScalar":
        if isinstance(x, ExactScalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls.rational(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to ExactScalar")

    # structure --------------------------------------------------------------
    def lift(self, m: int) -> "ExactScalar":
        """Same element viewed in Q(zeta_m); requires n | m."""
        if m == self.n:
            return self
        if m % self.n:
            raise ValueError(f"{self.n} does not divide {m}")
        step = m // self.n
        poly = [Fraction(0)] * ((len(self.coeffs) - 1) * step + 1)
        for k, c in enumerate(self.coeffs):
            poly[k * step] = c
        return ExactScalar(m, poly)

    def _common(self, other: Number) -> tuple["ExactScalar", "ExactScalar"]:
        other = ExactScalar.coerce(other)
        m = _lcm(self.n, other.n)
        if m > CONDUCTOR_BOUND:
            raise ConductorOverflowError(
                f"combining conductors {self.n} and {other.n} needs {m} > {CONDUCTOR_BOUND}"
            )
        return self.lift(m), other.lift(m)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def is_integer(self) -> bool:
        return self.is_rational() and self.coeffs[0].denominator == 1

    def embed(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.n)
        return complex(sum(float(c) * z**k for k, c in enumerate(self.coeffs)))

    def conjugate(self) -> "ExactScalar":
        poly = [Fraction(0)] * self.n
        for k, c in enumerate(self.coeffs):
            poly[(-k) % self.n] += c
        return ExactScalar(self.n, poly)

    def real(self) -> "ExactScalar":
        return (self + self.conjugate()) * Fraction(1, 2)

    def imag(self) -> "ExactScalar":
        i = ExactScalar.zeta(4)
        return (self - self.conjugate()) * Fraction(1, 2) * (-i)

    def normalized_trace(self) -> Fraction:
        """Tr_{K/Q}(a) / [K:Q]; independent of the field the element is viewed in."""
        total = Fraction(0)
        for k, c in enumerate(self.coeffs):
            if c:
                m = self.n // gcd(self.n, k)
                total += c * Fraction(_mobius(m), totient(m))
        return total

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        try:
            a, b = self._common(other)
        except TypeError:
            return NotImplemented
        return ExactScalar(a.n, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(self.n, [-c for c in self.coeffs])

    def __sub__(self, other):
        try:
            return self + (-ExactScalar.coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return ExactScalar.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExactScalar(self.n, [c * other for c in self.coeffs])
        try:
            a, b = self._common(other)
        except TypeError:
            return NotImplemented
        prod = [Fraction(0)] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    prod[i + j] += x * y
        return ExactScalar(a.n, prod)

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational():
            return ExactScalar(self.n, [1 / self.coeffs[0]])
        # solve (multiplication-by-self matrix) y = e_0
        d = len(self.coeffs)
        cols = []
        for k in range(d):
            cols.append((self * ExactScalar.zeta(self.n, k)).coeffs)
        mat = [[cols[j][i] for j in range(d)] for i in range(d)]
        rhs = [Fraction(1)] + [Fraction(0)] * (d - 1)
        return ExactScalar(self.n, _solve_fraction(mat, rhs))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return ExactScalar(self.n, [c / other for c in self.coeffs])
        try:
            return self * ExactScalar.coerce(other).inverse()
        except TypeError:
            return NotImplemented

    def __rtruediv__(self, other):
        return ExactScalar.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ExactScalar.rational(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        try:
            a, b = self._common(other)
        except TypeError:
            return NotImplemented
        return a.coeffs == b.coeffs

    def __hash__(self):
        return hash(self.normalized_trace())

    def __repr__(self):
        return f"ExactScalar({self})"

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            else:
                mono = f"zeta{self.n}" + (f"^{k}" if k > 1 else "")
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(terms) if terms else "0"


def _solve_fraction(mat: list[list], rhs: list) -> list:
    n = len(mat)
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise SingularMatrixError("singular system")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def cyclotomic_mul(a: ExactScalar, b: ExactScalar) -> ExactScalar:
    return a * b


# ---------------------------------------------------------------------------
# parsing of exact scalars written like "zeta8^2/1", "(1+zeta4)/2", "-3/4"

_ZETA = re.compile(r"zeta(\d+)$")


def parse_scalar(text: str) -> ExactScalar:
    expr = text.strip().replace("^", "**")
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse exact scalar {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return ExactScalar.rational(node.value)
        if isinstance(node, ast.Name):
            if node.id == "i":
                return ExactScalar.zeta(4)
            m = _ZETA.match(node.id)
            if m:
                return ExactScalar.zeta(int(m.group(1)))
            raise ValueError(f"unknown symbol {node.id!r} in {text!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            left = ev(node.left)
            if isinstance(node.op, ast.Pow):
                exp = node.right
                sign = 1
                if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                    exp, sign = exp.operand, -1
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                    raise ValueError(f"exponent must be an integer literal in {text!r}")
                return left ** (sign * exp.value)
            right = ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
        raise ValueError(f"unsupported expression {text!r}")

    return ev(tree)


# ---------------------------------------------------------------------------


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, ExactScalar) else x == 0


class ExactMatrix:
    """Dense matrix over Q or a cyclotomic field; entries are Fractions or ExactScalars."""

    def __init__(self, rows: Sequence[Sequence[Number]]):
        self.rows = [[Fraction(x) if isinstance(x, int) else x for x in row] for row in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != self.ncols for r in self.rows):
            raise ValueError("ragged matrix")

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int) -> "ExactMatrix":
        return cls([[Fraction(0)] * c for _ in range(r)])

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix) or other.shape != self.shape:
            return NotImplemented
        return all(a == b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb))

    def __hash__(self):
        return hash(tuple(hash(x) for row in self.rows for x in row))

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self):
        return ExactMatrix([[-a for a in r] for r in self.rows])

    def scale(self, c: Number) -> "ExactMatrix":
        return ExactMatrix([[c * a for a in r] for r in self.rows])

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = []
        for r in self.rows:
            row = []
            for j in range(other.ncols):
                acc = Fraction(0)
                for k in range(self.ncols):
                    a = r[k]
                    b = other.rows[k][j]
                    if not (_is_zero(a) or _is_zero(b)):
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return ExactMatrix(out)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([list(c) for c in zip(*self.rows)])

    def conjugate(self) -> "ExactMatrix":
        return ExactMatrix([[a.conjugate() if isinstance(a, ExactScalar) else a for a in r] for r in self.rows])

    def adjoint(self) -> "ExactMatrix":
        return self.conjugate().transpose()

    def trace(self):
        acc = Fraction(0)
        for i in range(min(self.shape)):
            acc = acc + self.rows[i][i]
        return acc

    def to_complex(self):
        import numpy as np

        return np.array(
            [[a.embed() if isinstance(a, ExactScalar) else complex(a) for a in r] for r in self.rows]
        )

    def _rref(self) -> tuple[list[list], list[int], Number]:
        """Reduced row echelon form, pivot columns and the determinant factor."""
        m = [list(r) for r in self.rows]
        pivots: list[int] = []
        det = Fraction(1)
        row = 0
        for col in range(self.ncols):
            piv = next((r for r in range(row, self.nrows) if not _is_zero(m[r][col])), None)
            if piv is None:
                det = Fraction(0)
                continue
            if piv != row:
                m[row], m[piv] = m[piv], m[row]
                det = -det
            p = m[row][col]
            det = det * p
            m[row] = [x / p for x in m[row]]
            for r in range(self.nrows):
                if r != row and not _is_zero(m[r][col]):
                    f = m[r][col]
                    m[r] = [x - f * y for x, y in zip(m[r], m[row])]
            pivots.append(col)
            row += 1
            if row == self.nrows:
                break
        if len(pivots) < self.nrows:
            det = Fraction(0)
        return m, pivots, det

    def det(self):
        if self.nrows != self.ncols:
            raise ValueError("determinant of non-square matrix")
        return self._rref()[2]

    def rank(self) -> int:
        return len(self._rref()[1])

    def inverse(self) -> "ExactMatrix":
        n = self.nrows
        if n != self.ncols:
            raise ValueError("inverse of non-square matrix")
        aug = ExactMatrix([r + e for r, e in zip(self.rows, ExactMatrix.identity(n).rows)])
        m, pivots, _ = aug._rref()
        if pivots[:n] != list(range(n)):
            raise SingularMatrixError("matrix is singular")
        return ExactMatrix([r[n:] for r in m])

    def kernel(self) -> list[list]:
        """Basis of the right null space."""
        m, pivots, _ = self._rref()
        free = [c for c in range(self.ncols) if c not in pivots]
        basis = []
        for f in free:
            v = [Fraction(0)] * self.ncols
            v[f] = Fraction(1)
            for i, pc in enumerate(pivots):
                v[pc] = -m[i][f]
            basis.append(v)
        return basis

    def __repr__(self):
        return "ExactMatrix([" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.rows) + "])"


# ---------------------------------------------------------------------------
# Smith normal form over the integers


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return (U, D, V) with U @ m @ V == D, D diagonal with d1 | d2 | ..., U and V unimodular.

    Plain elementary row/column reduction; entries stay Python ints throughout.
    """
    a = [[int(x) for x in row] for row in m]
    nr = len(a)
    nc = len(a[0]) if nr else 0
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]
    v = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):  # row_dst += k * row_src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, k):
        for row in a:
            row[dst] += k * row[src]
        for row in v:
            row[dst] += k * row[src]

    for t in range(min(nr, nc)):
        while True:
            entries = [(abs(a[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if a[i][j]]
            if not entries:
                break
            _, pi, pj = min(entries)
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = a[t][t]
            done = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    if a[t][j]:
                        done = False
            if not done:
                continue
            bad = next(
                (i for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return u, a, v


def int_det(m: Sequence[Sequence[int]]) -> int:
    det = ExactMatrix([[Fraction(x) for x in r] for r in m]).det()
    assert det.denominator == 1
    return int(det)
