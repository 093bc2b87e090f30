"""Exact rational ledger for the second cohomology of a Kummer-type resolution.

Basis ordering: [omega_0], [Re Omega_0], [Im Omega_0], [omega^-_alpha] (alpha <= d),
then [c_1(A_{p,i})] grouped by singular point p.  All arithmetic is over Q.

Classes that involve the normalizer sqrt(W_eps) are kept as (unnormalized class,
W_eps) pairs so every identity stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactalg import ExactMatrix

# ---------------------------------------------------------------------------
# Cartan matrices


class UnsupportedTypeError(ValueError):
    pass


class DegenerateNormalizerError(ValueError):
    pass


class BasisMismatchError(ValueError):
    pass


def cartan_matrix(kind: str, n: int) -> ExactMatrix:
    """Cartan matrix of the simply-laced Dynkin diagram (kind, n)."""
    edges: list[tuple[int, int]]
    if kind == "A" and n >= 1:
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "D" and n >= 4:
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    elif kind == "E" and n in (6, 7, 8):
        # chain 0-1-...-(n-2) with node n-1 attached to node 2
        edges = [(i, i + 1) for i in range(n - 2)] + [(2, n - 1)]
    else:
        raise UnsupportedTypeError(f"unsupported Dynkin type {kind}{n}")
    c = [[Fraction(2 if i == j else 0) for j in range(n)] for i in range(n)]
    for i, j in edges:
        c[i][j] = c[j][i] = Fraction(-1)
    return ExactMatrix(c)


def cartan_inverse(kind: str, n: int) -> ExactMatrix:
    """L = C^{-1}: with [E_i].[E_j] = -C_ij and c_1(A_i) dual to E_j, [c_1i].[c_1j] = -(C^{-1})_ij."""
    return cartan_matrix(kind, n).inverse()


def is_positive_definite(m: ExactMatrix) -> bool:
    """Sylvester's criterion: the pivots of unpivoted elimination are ratios of leading minors."""
    if m != m.transpose():
        return False
    a = [list(r) for r in m.rows]
    n = len(a)
    for k in range(n):
        piv = a[k][k]
        if piv <= 0:
            return False
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return True


# ---------------------------------------------------------------------------
# basis, classes and intersection data


@dataclass(frozen=True)
class SingularDatum:
    kind: str  # Dynkin letter
    rank: int  # N_{Gamma_p}

    @property
    def label(self) -> str:
        return f"{self.kind}{self.rank}"


@dataclass(frozen=True)
class CohomBasis:
    d_gamma: int
    singular_data: tuple[SingularDatum, ...]

    @property
    def dimension(self) -> int:
        return 3 + self.d_gamma + sum(p.rank for p in self.singular_data)

    @property
    def asd_offset(self) -> int:
        return 3

    @property
    def bubble_offset(self) -> int:
        return 3 + self.d_gamma

    def bubble_index(self, p: int, i: int) -> int:
        """Coordinate index of [c_1(A_{p,i})], 0-based p and i."""
        return self.bubble_offset + sum(q.rank for q in self.singular_data[:p]) + i

    def bubble_pairs(self) -> list[tuple[int, int]]:
        return [(p, i) for p, d in enumerate(self.singular_data) for i in range(d.rank)]

    def labels(self) -> list[str]:
        out = ["omega0", "ReOmega0", "ImOmega0"] + [f"omega-_{a + 1}" for a in range(self.d_gamma)]
        out += [f"c1(p{p + 1},{i + 1})" for p, i in self.bubble_pairs()]
        return out


@dataclass(frozen=True)
class CohomClass:
    basis: CohomBasis
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.basis.dimension:
            raise BasisMismatchError("coordinate vector does not match the basis dimension")

    @classmethod
    def unit(cls, basis: CohomBasis, index: int) -> "CohomClass":
        v = [Fraction(0)] * basis.dimension
        v[index] = Fraction(1)
        return cls(basis, tuple(v))

    @classmethod
    def zero(cls, basis: CohomBasis) -> "CohomClass":
        return cls(basis, tuple(Fraction(0) for _ in range(basis.dimension)))

    def _check(self, other: "CohomClass"):
        if other.basis != self.basis:
            raise BasisMismatchError("classes live in different bases")

    def __add__(self, other: "CohomClass") -> "CohomClass":
        self._check(other)
        return CohomClass(self.basis, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "CohomClass") -> "CohomClass":
        self._check(other)
        return CohomClass(self.basis, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __rmul__(self, c) -> "CohomClass":
        c = Fraction(c)
        return CohomClass(self.basis, tuple(c * a for a in self.coords))


@dataclass
class IntersectionData:
    basis: CohomBasis
    vol: Fraction
    L: list[ExactMatrix]
    eta: list[list[Fraction]]
    _q: CohomClass | None = field(default=None, repr=False)

    def __post_init__(self):
        self.vol = Fraction(self.vol)
        if self.vol <= 0:
            raise ValueError("vol(T) must be positive")
        if len(self.L) != len(self.basis.singular_data) or len(self.eta) != len(self.L):
            raise BasisMismatchError("one L block and one eta vector per singular point")
        for lp, ep, d in zip(self.L, self.eta, self.basis.singular_data):
            if lp.shape != (d.rank, d.rank) or len(ep) != d.rank:
                raise BasisMismatchError(f"block size mismatch for {d.label}")
            if not is_positive_definite(lp):
                raise ValueError(f"L block for {d.label} is not symmetric positive definite")
        self.eta = [[Fraction(x) for x in e] for e in self.eta]

    @property
    def Q(self) -> CohomClass:
        if self._q is None:
            v = [Fraction(0)] * self.basis.dimension
            for p, i in self.basis.bubble_pairs():
                v[self.basis.bubble_index(p, i)] = self.eta[p][i]
            self._q = CohomClass(self.basis, tuple(v))
        return self._q

    def l_eta(self, p: int) -> list[Fraction]:
        """sum_j L_{p,ij} eta_p^j; note [c_1(A_{p,i})].Q = -(L_p eta_p)_i."""
        lp = self.L[p]
        return [sum((lp[i, j] * self.eta[p][j] for j in range(lp.ncols)), Fraction(0)) for i in range(lp.nrows)]


def build_intersection_data(
    d_gamma: int, types: Sequence[tuple[str, int]], vol, eta: Sequence[Sequence] | None = None
) -> IntersectionData:
    basis = CohomBasis(d_gamma, tuple(SingularDatum(k, n) for k, n in types))
    L = [cartan_inverse(k, n) for k, n in types]
    if eta is None:
        eta = [[Fraction(1)] * n for _, n in types]
    return IntersectionData(basis, Fraction(vol), L, [list(e) for e in eta])


def intersection_data_from_pair(pair, vol=None, eta=None) -> IntersectionData:
    """Ledger for T^4_Lambda / Gamma from the exact singular-point classification."""
    from .orbifold import enumerate_singular_points, invariant_asd_dimension, torus_volume

    points = enumerate_singular_points(pair)
    types = []
    for p in points:
        kind, n = p.dynkin
        if n != p.n_irreps:
            raise ValueError(f"Dynkin rank {n} disagrees with irreducible count {p.n_irreps}")
        types.append((kind, n))
    vol = torus_volume(pair) if vol is None else vol
    return build_intersection_data(invariant_asd_dimension(pair), types, vol, eta)


# ---------------------------------------------------------------------------
# cup product


def _group(basis: CohomBasis, index: int) -> tuple[str, int]:
    if index < 3:
        return ("sd", index)
    if index < basis.bubble_offset:
        return ("asd", index - 3)
    k = index - basis.bubble_offset
    for p, d in enumerate(basis.singular_data):
        if k < d.rank:
            return ("c1", p * 10_000 + k)
        k -= d.rank
    raise IndexError(index)


def basis_cup(data: IntersectionData, i: int, j: int) -> Fraction:
    """Cup product of two basis classes."""
    gi, ki = _group(data.basis, i)
    gj, kj = _group(data.basis, j)
    if gi != gj:
        return Fraction(0)
    if gi == "sd":
        return data.vol if ki == kj else Fraction(0)
    if gi == "asd":
        return -data.vol if ki == kj else Fraction(0)
    pi, ii = divmod(ki, 10_000)
    pj, jj = divmod(kj, 10_000)
    if pi != pj:
        return Fraction(0)
    return -data.L[pi][ii, jj]


def cup_product(x: CohomClass, y: CohomClass, data: IntersectionData) -> Fraction:
    if x.basis != data.basis or y.basis != data.basis:
        raise BasisMismatchError("classes and intersection data use different bases")
    total = Fraction(0)
    nz_x = [(i, a) for i, a in enumerate(x.coords) if a]
    nz_y = [(j, b) for j, b in enumerate(y.coords) if b]
    for i, a in nz_x:
        for j, b in nz_y:
            c = basis_cup(data, i, j)
            if c:
                total += a * b * c
    return total


def cup_matrix(data: IntersectionData, classes: Sequence[CohomClass] | None = None) -> ExactMatrix:
    if classes is None:
        n = data.basis.dimension
        classes = [CohomClass.unit(data.basis, i) for i in range(n)]
    return ExactMatrix([[cup_product(a, b, data) for b in classes] for a in classes])


def w_epsilon(data: IntersectionData, eps) -> Fraction:
    """W_eps = 1 + eps^4 Q^2 / vol(T)."""
    eps = Fraction(eps)
    return 1 + eps**4 * cup_product(data.Q, data.Q, data) / data.vol


# ---------------------------------------------------------------------------
# the classes of the harmonic family


@dataclass
class HarmonicClasses:
    epsilon: Fraction
    w: Fraction  # squared normalizer of [omega~]
    omega_tilde_unnormalized: CohomClass  # [omega_0] + eps^2 Q; [omega~] = this / sqrt(w)
    re_omega: CohomClass
    im_omega: CohomClass
    omega_minus: list[CohomClass]
    xi_prime: dict[tuple[int, int], CohomClass]
    xi: dict[tuple[int, int], CohomClass]
    lam_scaled: dict[tuple[int, int], Fraction]  # lambda_eps * sqrt(w) for the bubble forms
    lam_minus: list[Fraction]  # lambda_eps for the omega^- forms (exactly 0)

    def asd_classes(self) -> list[CohomClass]:
        pairs = sorted(self.xi)
        return self.omega_minus + [self.xi[k] for k in pairs]


def harmonic_classes(data: IntersectionData, eps) -> HarmonicClasses:
    """Classes of the harmonic family, built from the projection A and the re-mixing of the Xi~'."""
    eps = Fraction(eps)
    b = data.basis
    w = w_epsilon(data, eps)
    if w <= 0:
        raise DegenerateNormalizerError(f"1 + eps^4 Q^2 / vol(T) = {w} is not positive; reduce epsilon")
    q = data.Q
    q2 = cup_product(q, q, data)
    omega0 = CohomClass.unit(b, 0)
    om_unnorm = omega0 + (eps**2) * q
    omega_minus = [CohomClass.unit(b, 3 + a) for a in range(b.d_gamma)]
    # lambda for omega^- uses [omega^-].[omega~] = 0
    lam_minus = [-eps**2 * cup_product(m, q, data) / data.vol for m in omega_minus]

    xi_prime, lam_scaled = {}, {}
    for p, i in b.bubble_pairs():
        c1 = CohomClass.unit(b, b.bubble_index(p, i))
        cq = cup_product(c1, q, data)
        # [Xi'] = eps^2 [c1]; lambda sqrt(W) = -eps^2 [Xi'].Q / vol
        lam_scaled[(p, i)] = -(eps**4) * cq / data.vol
        # eps^{-2}([Xi'] + lambda [omega~]) with [omega~] = om_unnorm / sqrt(W)
        coef = -(eps**2) * cq / (data.vol + eps**4 * q2)
        xi_prime[(p, i)] = c1 + coef * om_unnorm
    mix = CohomClass.zero(b)
    for p, i in b.bubble_pairs():
        mix = mix + data.eta[p][i] * xi_prime[(p, i)]
    xi = {}
    for p, i in b.bubble_pairs():
        c1 = CohomClass.unit(b, b.bubble_index(p, i))
        cq = cup_product(c1, q, data)
        xi[(p, i)] = xi_prime[(p, i)] + (eps**4 * cq / data.vol) * mix
    return HarmonicClasses(
        epsilon=eps,
        w=w,
        omega_tilde_unnormalized=om_unnorm,
        re_omega=CohomClass.unit(b, 1),
        im_omega=CohomClass.unit(b, 2),
        omega_minus=omega_minus,
        xi_prime=xi_prime,
        xi=xi,
        lam_scaled=lam_scaled,
        lam_minus=lam_minus,
    )


def xi_class_closed_form(data: IntersectionData, eps, p: int, i: int) -> CohomClass:
    """[c_1(A_{p,i})] + eps^2 (L_p eta_p)_i / vol(T) [omega_0]."""
    eps = Fraction(eps)
    b = data.basis
    return CohomClass.unit(b, b.bubble_index(p, i)) + (eps**2 * data.l_eta(p)[i] / data.vol) * CohomClass.unit(b, 0)


def gram_matrix(data: IntersectionData, eps) -> ExactMatrix:
    """L^2 Gram matrix of (omega~^-_alpha, Xi~_{p,i}) from the displayed closed formulas."""
    eps = Fraction(eps)
    b = data.basis
    d = b.d_gamma
    pairs = b.bubble_pairs()
    n = d + len(pairs)
    cq = {(p, i): -data.l_eta(p)[i] for p, i in pairs}  # [c_1(A_{p,i})].Q
    g = [[Fraction(0)] * n for _ in range(n)]
    for a in range(d):
        g[a][a] = data.vol
    for r, (p, i) in enumerate(pairs):
        for c, (q, j) in enumerate(pairs):
            val = eps**4 * cq[(p, i)] * cq[(q, j)] / data.vol
            if p == q:
                val += data.L[p][i, j]
            g[d + r][d + c] = val
    return ExactMatrix(g)


def gram_from_cup(data: IntersectionData, eps) -> ExactMatrix:
    """-(cup products) of the ASD classes of the harmonic family; <a, b> = -int a ^ b for ASD forms."""
    classes = harmonic_classes(data, eps).asd_classes()
    return -cup_matrix(data, classes)


# ---------------------------------------------------------------------------
# report


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def matrix_lines(m: ExactMatrix) -> list[str]:
    return [" ".join(fraction_str(x) for x in row) for row in m.rows]


def ledger_report(data: IntersectionData, eps_values: Sequence) -> str:
    b = data.basis
    lines = [
        "[basis]",
        f"dimension={b.dimension}",
        f"d_gamma={b.d_gamma}",
        "singular=" + ",".join(d.label for d in b.singular_data),
        "labels=" + ",".join(b.labels()),
        f"vol={fraction_str(data.vol)}",
        f"Q^2={fraction_str(cup_product(data.Q, data.Q, data))}",
        "",
        "[cup]",
        *matrix_lines(cup_matrix(data)),
    ]
    for eps in eps_values:
        eps = Fraction(eps)
        lines += [
            "",
            f"[eps={fraction_str(eps)}]",
            f"W={fraction_str(w_epsilon(data, eps))}",
            "gram=",
            *matrix_lines(gram_matrix(data, eps)),
        ]
    return "\n".join(lines) + "\n"
