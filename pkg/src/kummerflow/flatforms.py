"""Constant and pointwise 2-forms on R^4 = C^2.

Components are stored in the basis
    dx1^dx2, dx1^dx3, dx1^dx4, dx2^dx3, dx2^dx4, dx3^dx4
with z = x1 + i x2, w = x3 + i x4 and orientation dx1^dx2^dx3^dx4.
Most functions accept stacked arrays of shape (..., 6).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import numpy as np

from .exactalg import ExactMatrix, ExactScalar

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

OMEGA0 = np.array([1.0, 0, 0, 0, 0, 1.0])
RE_OMEGA0 = np.array([0, 1.0, 0, 0, -1.0, 0])
IM_OMEGA0 = np.array([0, 0, 1.0, 1.0, 0, 0])
OMEGA_MINUS = np.array(
    [
        [1.0, 0, 0, 0, 0, -1.0],  # dx12 - dx34
        [0, 1.0, 0, 0, 1.0, 0],  # dx13 + dx24
        [0, 0, 1.0, -1.0, 0, 0],  # dx14 - dx23
    ]
)

# complex structure on tangent vectors: J d/dx1 = d/dx2, J d/dx3 = d/dx4
J = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)

_LEVI = np.zeros((4, 4, 4, 4))
for _perm in permutations(range(4)):
    _inv = sum(1 for a in range(4) for b in range(a + 1, 4) if _perm[a] > _perm[b])
    _LEVI[_perm] = -1.0 if _inv % 2 else 1.0

# dz_j and conj(dz_k) as complex covectors on R^4
_DZ = np.array([[1, 1j, 0, 0], [0, 0, 1, 1j]])
# _DZDZB[j, k] is the antisymmetric matrix of dz_j ^ conj(dz_k)
_DZDZB = np.einsum("ja,kb->jkab", _DZ, _DZ.conj()) - np.einsum("kb,ja->jkba", _DZ.conj(), _DZ)


class DegenerateMetricError(ValueError):
    pass


def to_matrix(comps) -> np.ndarray:
    comps = np.asarray(comps, dtype=float)
    mat = np.zeros(comps.shape[:-1] + (4, 4))
    for k, (i, j) in enumerate(PAIRS):
        mat[..., i, j] = comps[..., k]
        mat[..., j, i] = -comps[..., k]
    return mat


def from_matrix(mat) -> np.ndarray:
    mat = np.asarray(mat)
    return np.stack([mat[..., i, j] for i, j in PAIRS], axis=-1)


def _check_metric(metric: np.ndarray) -> None:
    sym = np.allclose(metric, np.swapaxes(metric, -1, -2), rtol=1e-10, atol=1e-12)
    eig = np.linalg.eigvalsh(0.5 * (metric + np.swapaxes(metric, -1, -2)))
    if not sym or np.any(eig <= 0) or not np.all(np.isfinite(eig)):
        raise DegenerateMetricError("metric is not symmetric positive definite")


def star(comps, metric=None) -> np.ndarray:
    """Hodge star of 2-forms with respect to `metric` (identity when omitted)."""
    comps = np.asarray(comps, dtype=float)
    if metric is None:
        metric = np.broadcast_to(np.eye(4), comps.shape[:-1] + (4, 4))
    metric = np.asarray(metric, dtype=float)
    _check_metric(metric)
    ginv = np.linalg.inv(metric)
    up = ginv @ to_matrix(comps) @ ginv
    vol = np.sqrt(np.linalg.det(metric))
    out = 0.5 * np.einsum("...ij,ijkl->...kl", up, _LEVI) * vol[..., None, None]
    return from_matrix(out)


def wedge(a, b) -> np.ndarray:
    """Coefficient of dx1^dx2^dx3^dx4 in a ^ b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (
        a[..., 0] * b[..., 5]
        - a[..., 1] * b[..., 4]
        + a[..., 2] * b[..., 3]
        + a[..., 3] * b[..., 2]
        - a[..., 4] * b[..., 1]
        + a[..., 5] * b[..., 0]
    )


def form_norm(comps, metric=None) -> np.ndarray:
    """Pointwise norm |a|_g with |dx1^dx2|_flat = 1."""
    mat = to_matrix(comps)
    if metric is None:
        return np.sqrt(np.sum(np.asarray(comps, dtype=float) ** 2, axis=-1))
    ginv = np.linalg.inv(np.asarray(metric, dtype=float))
    val = 0.5 * np.einsum("...ij,...ik,...jl,...kl->...", mat, ginv, ginv, mat)
    return np.sqrt(np.maximum(val, 0.0))


def top_form_norm(coeff, metric=None) -> np.ndarray:
    """Norm of coeff * dx1^dx2^dx3^dx4."""
    coeff = np.abs(np.asarray(coeff, dtype=float))
    if metric is None:
        return coeff
    return coeff / np.sqrt(np.linalg.det(np.asarray(metric, dtype=float)))


def asd_part(comps, metric=None) -> np.ndarray:
    return 0.5 * (np.asarray(comps, dtype=float) - star(comps, metric))


def sd_part(comps, metric=None) -> np.ndarray:
    return 0.5 * (np.asarray(comps, dtype=float) + star(comps, metric))


def type11_part(comps) -> np.ndarray:
    """Projection onto J-invariant (type (1,1)) forms."""
    mat = to_matrix(comps)
    return from_matrix(0.5 * (mat + J.T @ mat @ J))


def metric_from_kahler(comps) -> np.ndarray:
    """Riemannian metric g(X, Y) = omega(X, JY) of a (1,1) Kahler form."""
    g = to_matrix(comps) @ J
    return 0.5 * (g + np.swapaxes(g, -1, -2))


@dataclass
class TwoFormAtPoint:
    components: np.ndarray
    metric: np.ndarray = field(default_factory=lambda: np.eye(4))

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float).reshape(6)
        self.metric = np.asarray(self.metric, dtype=float).reshape(4, 4)

    def norm(self) -> float:
        return float(form_norm(self.components, self.metric))


def hodge_star(form: TwoFormAtPoint) -> TwoFormAtPoint:
    return TwoFormAtPoint(star(form.components, form.metric), form.metric)


# ---------------------------------------------------------------------------
# (1,1)-forms given by hermitian coefficient matrices


def hermitian_to_real(h) -> np.ndarray:
    """Real components of  i * sum_jk h[j,k] dz_j ^ conj(dz_k)."""
    h = np.asarray(h, dtype=complex)
    mat = 1j * np.einsum("...jk,jkab->...ab", h, _DZDZB)
    return from_matrix(mat.real)


def complex_coords(points) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(points, dtype=float)
    return x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]


def ddbar_product(points, g0, g1, g2, qmat=None, qconst: float = 0.0, g_radial=None) -> np.ndarray:
    """Components of i ddbar( g(s) q ) at `points` (shape (N, 4)).

    s = |z|^2 + |w|^2, q = v^* qmat v + qconst with v = (z, w), and g0, g1, g2
    are g, g', g'' evaluated at s (arrays of shape (N,)).  Passing
    g_radial = g' + s g'' avoids the cancellation between g' and s g'' near the
    origin; g2 is then ignored.
    """
    z, w = complex_coords(points)
    v = np.stack([z, w], axis=-1)
    p = v.conj()  # coefficients of del s
    if qmat is None:
        qmat = np.zeros((2, 2), dtype=complex)
    qmat = np.asarray(qmat, dtype=complex)
    a = np.einsum("kj,...k->...j", qmat, v.conj())  # coefficients of del q
    q = np.real(np.einsum("...j,jk,...k->...", v.conj(), qmat, v)) + qconst
    g0 = np.asarray(g0, dtype=float)[..., None, None]
    g1 = np.asarray(g1, dtype=float)[..., None, None]
    g2 = np.asarray(g2, dtype=float)[..., None, None]
    qq = q[..., None, None]
    pp = np.einsum("...j,...k->...jk", p, p.conj())
    ap = np.einsum("...j,...k->...jk", a, p.conj())
    pa = np.einsum("...j,...k->...jk", p, a.conj())
    if g_radial is None:
        h = g2 * qq * pp + g1 * (ap + pa + qq * np.eye(2)) + g0 * qmat.T
    else:
        gr = np.asarray(g_radial, dtype=float)[..., None, None]
        s = np.sum(np.abs(v) ** 2, axis=-1)[..., None, None]
        proj = pp / s
        h = qq * (g1 * (np.eye(2) - proj) + gr * proj) + g1 * (ap + pa) + g0 * qmat.T
    return hermitian_to_real(h)


# hermitian matrices of the flat Hamiltonians mu0, nu02, nu03 (q = v^* M v)
HAMILTONIAN_MATRICES = {
    1: np.array([[0.5, 0], [0, -0.5]], dtype=complex),
    2: np.array([[0, 0.5j], [-0.5j, 0]], dtype=complex),
    3: np.array([[0, 0.5], [0.5, 0]], dtype=complex),
}


# ---------------------------------------------------------------------------
# group action


def real_matrix(g) -> np.ndarray:
    """4x4 real matrix of the complex-linear map v -> g v in (x1..x4) coordinates."""
    if isinstance(g, ExactMatrix):
        g = g.to_complex()
    g = np.asarray(g, dtype=complex)
    out = np.zeros((4, 4))
    for j in range(2):
        for k in range(2):
            p, q = g[j, k].real, g[j, k].imag
            out[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = [[p, -q], [q, p]]
    return out


def gamma_pullback(comps, g) -> np.ndarray:
    """Pullback of constant-coefficient 2-forms under the linear map g."""
    gr = real_matrix(g)
    return from_matrix(gr.T @ to_matrix(comps) @ gr)


def asd_representation(g) -> np.ndarray:
    """3x3 matrix of the pullback action on span{omega^-_1, omega^-_2, omega^-_3}."""
    images = gamma_pullback(OMEGA_MINUS, g)
    # the basis is orthogonal with squared norm 2
    return (images @ OMEGA_MINUS.T).T / 2.0


_I = ExactScalar.zeta(4)
_HALF = Fraction(1, 2)


def asd_representation_exact(g: ExactMatrix) -> ExactMatrix:
    """Exact 3x3 matrix of the pullback action on the anti-self-dual basis.

    Works with hermitian coefficient matrices: the pullback of
    i sum h_jk dz_j ^ conj(dz_k) has matrix g^T h conj(g).
    """
    basis = [
        ExactMatrix([[_HALF, 0], [0, -_HALF]]),
        ExactMatrix([[0, -_I * _HALF], [_I * _HALF, 0]]),
        ExactMatrix([[0, _HALF], [_HALF, 0]]),
    ]
    cols = []
    for h in basis:
        hp = g.transpose() @ h @ g.conjugate()
        c1 = hp[0, 0] - hp[1, 1]
        c2 = _I * (hp[0, 1] - hp[1, 0])
        c3 = hp[0, 1] + hp[1, 0]
        cols.append([c1, c2, c3])
    return ExactMatrix([[cols[j][i] for j in range(3)] for i in range(3)])
