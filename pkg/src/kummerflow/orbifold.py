"""Singular points of T^4 / Gamma for a lattice Lambda in C^2 and a finite Gamma in SU(2).

All computations are exact.  Points of the torus are handled in lattice
coordinates t in [0, 1)^4 (x = sum_j t_j lambda_j); every group element acts on
them by an integer matrix, so fixed points and orbits reduce to rational
arithmetic modulo Z^4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Sequence

from .exactalg import ExactMatrix, ExactScalar, int_det, parse_scalar, smith_normal_form
from .flatforms import asd_representation_exact

ORDER_BOUND = 120


class GroupClosureError(ValueError):
    pass


class CompatibilityError(ValueError):
    pass


class NonIsolatedFixedLocusError(ValueError):
    pass


class TrivialGroupError(ValueError):
    pass


Element = tuple  # 2x2 matrix flattened into a tuple of four ExactScalars


def _elem(m: ExactMatrix) -> Element:
    return tuple(ExactScalar.coerce(x) for row in m.rows for x in row)


def _mat(e: Element) -> ExactMatrix:
    return ExactMatrix([[e[0], e[1]], [e[2], e[3]]])


def _mul(a: Element, b: Element) -> Element:
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def _inv(a: Element) -> Element:
    # unitary: inverse is the conjugate transpose
    return (a[0].conjugate(), a[2].conjugate(), a[1].conjugate(), a[3].conjugate())


_ONE = ExactScalar.rational(1)
_ZERO = ExactScalar.rational(0)
IDENTITY: Element = (_ONE, _ZERO, _ZERO, _ONE)


def group_closure(generators: Sequence[ExactMatrix], order_bound: int = ORDER_BOUND) -> list[Element]:
    """All elements of the group generated, identity first, in breadth-first order."""
    gens = [_elem(g) for g in generators]
    seen = {IDENTITY: 0}
    order = [IDENTITY]
    frontier = [IDENTITY]
    length = 0
    while frontier:
        length += 1
        nxt = []
        for x in frontier:
            for g in gens:
                y = _mul(g, x)
                if y not in seen:
                    seen[y] = length
                    order.append(y)
                    nxt.append(y)
                    if len(order) > order_bound:
                        raise GroupClosureError(
                            f"group closure exceeded order bound {order_bound} at word length {length}"
                        )
        frontier = nxt
    return order


def element_order(a: Element) -> int:
    k, x = 1, a
    while x != IDENTITY:
        x = _mul(x, a)
        k += 1
    return k


@dataclass
class LatticeGroupPair:
    lattice_basis: list[list[ExactScalar]]  # four vectors (z, w)
    group_generators: list[ExactMatrix]
    order_bound: int = ORDER_BOUND
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.lattice_basis = [[ExactScalar.coerce(c) for c in v] for v in self.lattice_basis]
        if len(self.lattice_basis) != 4 or any(len(v) != 2 for v in self.lattice_basis):
            raise ValueError("lattice basis must be four vectors in C^2")
        for g in self.group_generators:
            if g.shape != (2, 2):
                raise ValueError("generators must be 2x2")
            if g @ g.adjoint() != ExactMatrix.identity(2) or g.det() != 1:
                raise ValueError(f"generator {g} is not in SU(2)")
        if self.real_basis().det() == 0:
            raise ValueError("lattice basis is not of full rank")

    @classmethod
    def from_strings(cls, basis: Sequence[Sequence[str]], generators: Sequence[Sequence[Sequence[str]]]):
        return cls(
            [[parse_scalar(c) for c in v] for v in basis],
            [ExactMatrix([[parse_scalar(c) for c in row] for row in g]) for g in generators],
        )

    def elements(self) -> list[Element]:
        if "elements" not in self._cache:
            self._cache["elements"] = group_closure(self.group_generators, self.order_bound)
        return self._cache["elements"]

    def real_basis(self) -> ExactMatrix:
        """Columns are the lattice vectors in real coordinates (x1, x2, x3, x4)."""
        cols = [[v[0].real(), v[0].imag(), v[1].real(), v[1].imag()] for v in self.lattice_basis]
        return ExactMatrix([[cols[j][i] for j in range(4)] for i in range(4)])

    def lattice_action(self, g: Element) -> ExactMatrix:
        """Matrix of g in lattice coordinates: B^{-1} g_R B (exact, not necessarily integral)."""
        key = ("action", g)
        if key not in self._cache:
            b = self.real_basis()
            if "binv" not in self._cache:
                self._cache["binv"] = b.inverse()
            gr = [[_ZERO] * 4 for _ in range(4)]
            for j in range(2):
                for k in range(2):
                    p, q = g[2 * j + k].real(), g[2 * j + k].imag()
                    gr[2 * j][2 * k], gr[2 * j][2 * k + 1] = p, -q
                    gr[2 * j + 1][2 * k], gr[2 * j + 1][2 * k + 1] = q, p
            self._cache[key] = self._cache["binv"] @ ExactMatrix(gr) @ b
        return self._cache[key]

    def integer_action(self, g: Element) -> list[list[int]]:
        m = self.lattice_action(g)
        out = []
        for row in m.rows:
            vals = []
            for x in row:
                x = ExactScalar.coerce(x)
                if not x.is_integer():
                    raise CompatibilityError(f"group element does not preserve the lattice (entry {x})")
                vals.append(int(x.to_fraction()))
            out.append(vals)
        return out

    def point(self, t: Sequence[Fraction]) -> tuple[ExactScalar, ExactScalar]:
        """Point of C^2 with lattice coordinates t."""
        z = sum((ti * v[0] for ti, v in zip(t, self.lattice_basis)), _ZERO)
        w = sum((ti * v[1] for ti, v in zip(t, self.lattice_basis)), _ZERO)
        return z, w


def check_compatibility(pair: LatticeGroupPair) -> bool:
    """True iff every generator maps every lattice vector into the lattice."""
    pair.elements()  # raises GroupClosureError for infinite groups
    for g in pair.group_generators:
        m = pair.lattice_action(_elem(g))
        if not all(ExactScalar.coerce(x).is_integer() for row in m.rows for x in row):
            return False
    return True


# ---------------------------------------------------------------------------


def _mod1(t) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) - (Fraction(x).numerator // Fraction(x).denominator) for x in t)


def _apply(m: list[list[int]], t) -> tuple[Fraction, ...]:
    return _mod1(sum(m[i][j] * t[j] for j in range(4)) for i in range(4))


def fixed_points(m: list[list[int]]) -> list[tuple[Fraction, ...]]:
    """Solutions t in [0,1)^4 of (m - I) t in Z^4, via the Smith normal form."""
    a = [[m[i][j] - int(i == j) for j in range(4)] for i in range(4)]
    if int_det(a) == 0:
        raise NonIsolatedFixedLocusError("non-isolated fixed locus: det(g - I) = 0 for some g != 1")
    _, d, v = smith_normal_form(a)
    diag = [d[i][i] for i in range(4)]
    pts = set()
    for ks in product(*(range(di) for di in diag)):
        y = [Fraction(k, di) for k, di in zip(ks, diag)]
        pts.add(_mod1(sum(v[i][j] * y[j] for j in range(4)) for i in range(4)))
    return sorted(pts)


@dataclass
class SingularPoint:
    lattice_coords: tuple[Fraction, ...]
    representative: tuple[ExactScalar, ExactScalar]
    stabilizer: list[Element]
    stabilizer_type: str  # "Z<m>", "BD<4k>", "2T", "2O", "2I"
    orbit_size: int

    @property
    def dynkin(self) -> tuple[str, int]:
        return dynkin_label(self.stabilizer)

    @property
    def n_irreps(self) -> int:
        return count_nontrivial_irreps(self.stabilizer)


def is_abelian(elements: Sequence[Element]) -> bool:
    return all(_mul(a, b) == _mul(b, a) for a in elements for b in elements)


def stabilizer_type(elements: Sequence[Element]) -> str:
    n = len(elements)
    if is_abelian(elements):
        return f"Z{n}"
    if n % 4 == 0 and any(element_order(x) == n // 2 for x in elements):
        return f"BD{n}"
    return {24: "2T", 48: "2O", 120: "2I"}.get(n, f"G{n}")


def dynkin_label(elements: Sequence[Element]) -> tuple[str, int]:
    kind = stabilizer_type(elements)
    n = len(elements)
    if kind.startswith("Z"):
        return ("A", n - 1)
    if kind.startswith("BD"):
        return ("D", n // 4 + 2)
    return {"2T": ("E", 6), "2O": ("E", 7), "2I": ("E", 8)}[kind]


def count_nontrivial_irreps(elements: Sequence[Element]) -> int:
    """Number of conjugacy classes minus one."""
    elements = list(elements)
    if not elements:
        return 0
    remaining = set(elements)
    classes = 0
    while remaining:
        x = remaining.pop()
        for g in elements:
            remaining.discard(_mul(_mul(g, x), _inv(g)))
        classes += 1
    return classes - 1


def enumerate_singular_points(pair: LatticeGroupPair) -> list[SingularPoint]:
    elements = pair.elements()
    if len(elements) == 1:
        raise TrivialGroupError("Γ nontrivial required")
    if not check_compatibility(pair):
        raise CompatibilityError("lattice is not preserved by the group")
    actions = {g: pair.integer_action(g) for g in elements}

    fixed: set[tuple[Fraction, ...]] = set()
    for g in elements[1:]:
        fixed.update(fixed_points(actions[g]))

    points = []
    done: set[tuple[Fraction, ...]] = set()
    for t in sorted(fixed):
        if t in done:
            continue
        orbit = {_apply(actions[g], t) for g in elements}
        done |= orbit
        rep = min(orbit)
        stab = [g for g in elements if _apply(actions[g], rep) == rep]
        points.append(
            SingularPoint(
                lattice_coords=rep,
                representative=pair.point(rep),
                stabilizer=stab,
                stabilizer_type=stabilizer_type(stab),
                orbit_size=len(orbit),
            )
        )
    points.sort(key=lambda p: p.lattice_coords)
    return points


def invariant_asd_dimension(pair: LatticeGroupPair) -> int:
    """Dimension of the Gamma-invariant part of the anti-self-dual constant 2-forms."""
    elements = pair.elements()
    total = ExactMatrix.zeros(3, 3)
    for g in elements:
        total = total + asd_representation_exact(_mat(g))
    return total.scale(Fraction(1, len(elements))).rank()


def k3_count(pair: LatticeGroupPair, points: list[SingularPoint] | None = None) -> int:
    if points is None:
        points = enumerate_singular_points(pair)
    return invariant_asd_dimension(pair) + sum(p.n_irreps for p in points)


def torus_volume(pair: LatticeGroupPair) -> Fraction:
    """Integral of omega_0^2 over T^4 / Gamma (equals 2 |det B| / |Gamma|)."""
    det = ExactScalar.coerce(pair.real_basis().det())
    return 2 * abs(det.to_fraction()) / len(pair.elements())


def brute_force_fixed_count(m: list[list[int]], denominator: int) -> int:
    """Count t in (1/denominator) Z^4 / Z^4 with (m - I) t in Z^4; used as an oracle."""
    count = 0
    for ks in product(range(denominator), repeat=4):
        t = [Fraction(k, denominator) for k in ks]
        r = [sum(m[i][j] * t[j] for j in range(4)) - t[i] for i in range(4)]
        if all(x.denominator == 1 for x in r):
            count += 1
    return count


def lcm_list(values) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out
