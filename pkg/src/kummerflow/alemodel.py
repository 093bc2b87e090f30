"""Eguchi-Hanson model of the resolution of C^2 / Z_2 in radial form.

Everything is written in terms of s = |z|^2 + |w|^2.  The Kahler potential
phi(s) has phi'(s) = sqrt(s^2 + a^4) / (2 s), the unique solution of the radial
Ricci-flat equation 4 phi' (phi' + s phi'') = 1 with s phi' -> a^2 / 2 at s = 0,
normalized so that phi(s) - s/2 -> 0 at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, solve_ivp

from .flatforms import (
    HAMILTONIAN_MATRICES,
    TwoFormAtPoint,
    ddbar_product,
    form_norm,
    metric_from_kahler,
    star,
    wedge,
)

DEFAULT_NODES = 2048


# ---------------------------------------------------------------------------
# radial grids and profiles


def log_grid(s_min: float, s_max: float, n: int = DEFAULT_NODES) -> np.ndarray:
    if not 0 < s_min < s_max:
        raise ValueError("need 0 < s_min < s_max")
    return np.exp(np.linspace(np.log(s_min), np.log(s_max), n))


def default_grid(a: float) -> np.ndarray:
    scale = a * a if a > 0 else 1.0
    return log_grid(1e-4 * scale, 1e4 * scale)


def t_derivatives(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives in t on a uniform grid, fourth order everywhere."""
    f = np.asarray(values, dtype=float)
    n = f.size
    if n < 6:
        raise ValueError("need at least 6 nodes")
    d1 = np.empty(n)
    d2 = np.empty(n)
    d1[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d2[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    c10 = np.array([-25, 48, -36, 16, -3]) / 12.0
    c11 = np.array([-3, -10, 18, -6, 1]) / 12.0
    c20 = np.array([45, -154, 214, -156, 61, -10]) / 12.0
    c21 = np.array([10, -15, -4, 14, -6, 1]) / 12.0
    d1[0] = c10 @ f[:5] / h
    d1[1] = c11 @ f[:5] / h
    d1[-1] = -(c10 @ f[::-1][:5]) / h
    d1[-2] = -(c11 @ f[::-1][:5]) / h
    d2[0] = c20 @ f[:6] / h**2
    d2[1] = c21 @ f[:6] / h**2
    d2[-1] = c20 @ f[::-1][:6] / h**2
    d2[-2] = c21 @ f[::-1][:6] / h**2
    return d1, d2


@dataclass(frozen=True)
class RadialProfile:
    """Samples of a radial function f on a log-spaced grid of s values.

    Derivatives are taken in t = log s.  `dt1`, `dt2` hold the analytic values
    of df/dt and d^2f/dt^2 when known; otherwise fourth-order stencils are used.
    Working in t keeps s f' + s^2 f'' free of cancellation near s = 0.
    """

    s: np.ndarray
    values: np.ndarray
    dt1: np.ndarray | None = None
    dt2: np.ndarray | None = None

    def __post_init__(self):
        if np.any(np.diff(self.s) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")

    @property
    def h(self) -> float:
        return float(np.log(self.s[1] / self.s[0]))

    def t_derivatives(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dt1 is not None and self.dt2 is not None:
            return self.dt1, self.dt2
        return t_derivatives(self.values, self.h)

    def ds(self) -> np.ndarray:
        return self.t_derivatives()[0] / self.s

    def ds2(self) -> np.ndarray:
        f1, f2 = self.t_derivatives()
        return (f2 - f1) / self.s**2

    def numeric(self) -> "RadialProfile":
        """Copy without analytic derivatives."""
        return RadialProfile(self.s, self.values)


# ---------------------------------------------------------------------------
# the Eguchi-Hanson potential


def eh_deviation_jets(s, a: float) -> tuple[np.ndarray, ...]:
    """phi - s/2, phi' - 1/2, phi'', phi''' evaluated stably at s."""
    s = np.asarray(s, dtype=float)
    if a == 0:
        z = np.zeros_like(s)
        return z, z, z, z
    a2 = a * a
    a4 = a2 * a2
    r = np.sqrt(s * s + a4)
    dev0 = 0.5 * (a4 / (r + s) - a2 * np.log1p((a2 + a4 / (r + s)) / s))
    dev1 = a4 / (2 * s * (r + s))
    d2 = -a4 / (2 * s * s * r)
    d3 = a4 * (2 * r * r + s * s) / (2 * s**3 * r**3)
    return dev0, dev1, d2, d3


def eh_jets(s, a: float) -> tuple[np.ndarray, ...]:
    """phi, phi', phi'', phi''' at s."""
    s = np.asarray(s, dtype=float)
    d0, d1, d2, d3 = eh_deviation_jets(s, a)
    return d0 + 0.5 * s, d1 + 0.5, d2, d3


def eh_radial_second(s, a: float) -> np.ndarray:
    """phi' + s phi'' = s / (2 sqrt(s^2 + a^4)), free of cancellation."""
    s = np.asarray(s, dtype=float)
    return s / (2 * np.sqrt(s * s + a**4))


def eh_potential(a: float, grid: np.ndarray | None = None) -> RadialProfile:
    if a < 0:
        raise ValueError("a must be positive")
    s = default_grid(a) if grid is None else np.asarray(grid, dtype=float)
    r = np.sqrt(s * s + a**4)
    return RadialProfile(s, eh_jets(s, a)[0], r / 2, s * s / (2 * r))


def ricci_flat_residual(profile: RadialProfile) -> float:
    """sup |4 phi' (phi' + s phi'') - 1| on the grid, evaluated as 4 phi_t phi_tt / s^2 - 1."""
    f1, f2 = profile.t_derivatives()
    return float(np.max(np.abs(4 * f1 * f2 / profile.s**2 - 1)))


def integrate_eh_ode(a: float, grid: np.ndarray, rtol: float = 1e-13) -> np.ndarray:
    """phi'(s) on `grid` by integrating u' = s / (4u), u = s phi', u(0) = a^2/2."""
    if a <= 0:
        return np.full_like(np.asarray(grid, dtype=float), 0.5)
    sol = solve_ivp(
        lambda s, u: s / (4 * u),
        (0.0, float(grid[-1])),
        [a * a / 2],
        method="DOP853",
        t_eval=grid,
        rtol=rtol,
        atol=1e-14 * a * a,
    )
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[0] / grid


@dataclass
class ALEModel:
    a: float = 1.0
    gamma_order: int = 2
    grid: np.ndarray | None = None
    volume_normalization: float = field(init=False)

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be non-negative")
        if self.gamma_order != 2:
            raise NotImplementedError("only Z_2 has a numerical metric; use the cohomology ledger for m > 2")
        if self.grid is None:
            self.grid = default_grid(self.a)
        # alpha / 2 pi integrated over C^2 / Z_m
        self.volume_normalization = 1.0 / (4 * np.pi**2 * self.gamma_order)

    @property
    def potential(self) -> RadialProfile:
        return eh_potential(self.a, self.grid)

    def jets(self, s):
        return eh_jets(s, self.a)

    def kahler_form(self, points) -> np.ndarray:
        s = np.sum(np.asarray(points, dtype=float) ** 2, axis=-1)
        phi, p1, p2, _ = self.jets(s)
        return ddbar_product(points, phi, p1, p2, qconst=1.0, g_radial=eh_radial_second(s, self.a))

    def metric(self, points) -> np.ndarray:
        return metric_from_kahler(self.kahler_form(points))


# ---------------------------------------------------------------------------
# Hamiltonians of the SU(2) action


def moment_map_flat(z: complex, w: complex) -> tuple[float, float, float]:
    zw = np.conj(z) * w
    return 0.5 * (abs(z) ** 2 - abs(w) ** 2), float(-np.imag(zw)), float(np.real(zw))


def flat_hamiltonian(points, alpha: int = 1) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    v = np.stack([x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]], axis=-1)
    m = HAMILTONIAN_MATRICES[alpha]
    return np.real(np.einsum("...j,jk,...k->...", v.conj(), m, v))


def eh_hamiltonian(model: ALEModel, points, alpha: int = 1) -> np.ndarray:
    """Hamiltonian 1/2 dphi(I v) of the SU(2) direction alpha; equals 2 phi'(s) nu_{0,alpha}."""
    s = np.sum(np.asarray(points, dtype=float) ** 2, axis=-1)
    return 2 * model.jets(s)[1] * flat_hamiltonian(points, alpha)


def moment_map_eh(model: ALEModel, points) -> np.ndarray:
    """Moment map of (z, w) -> (lambda z, lambda^{-1} w) for the Eguchi-Hanson form."""
    return eh_hamiltonian(model, points, 1)


def circle_generator(points) -> np.ndarray:
    """u = 2 Im(z d/dz - w d/dw) as a real vector field."""
    x = np.asarray(points, dtype=float)
    return np.stack([x[..., 1], -x[..., 0], -x[..., 3], x[..., 2]], axis=-1)


def contract(vector, comps) -> np.ndarray:
    """The 1-form omega(v, .)."""
    from .flatforms import to_matrix

    return np.einsum("...i,...ij->...j", vector, to_matrix(comps))


def hamiltonian_form(model: ALEModel, points, alpha: int = 1) -> np.ndarray:
    """i ddbar of the EH Hamiltonian nu_alpha = 2 phi' nu_{0,alpha}."""
    s = np.sum(np.asarray(points, dtype=float) ** 2, axis=-1)
    _, p1, p2, p3 = model.jets(s)
    a4 = model.a**4
    r = np.sqrt(s * s + a4)
    radial = a4 * (r * r + s * s) / (s * s * r**3)  # twice the radial second derivative of phi'
    return ddbar_product(points, 2 * p1, 2 * p2, 2 * p3, HAMILTONIAN_MATRICES[alpha], g_radial=radial)


# ---------------------------------------------------------------------------
# the radial anti-self-dual potential


def asd_potential_jets(s, a: float, c: float) -> tuple[np.ndarray, ...]:
    """psi, psi', psi'', psi''' with psi' = 2C / (s sqrt(s^2 + a^4)), psi -> 0 at infinity."""
    s = np.asarray(s, dtype=float)
    a2 = a * a
    r = np.sqrt(s * s + a2 * a2)
    psi = -(2 * c / a2) * np.arcsinh(a2 / s)
    d1 = 2 * c / (s * r)
    d2 = -2 * c * (1 / (s * s * r) + 1 / r**3)
    d3 = 2 * c * (2 / (s**3 * r) + 1 / (s * r**3) + 3 * s / r**5)
    return psi, d1, d2, d3


def asd_radial_second(s, a: float, c: float) -> np.ndarray:
    """psi' + s psi'' = -2 C s / (s^2 + a^4)^(3/2)."""
    s = np.asarray(s, dtype=float)
    return -2 * c * s / (s * s + a**4) ** 1.5


def asd_potential(model: ALEModel, normalization: float) -> RadialProfile:
    if model.gamma_order != 2:
        raise NotImplementedError("radial anti-self-dual potential exists for Z_2 only")
    if model.a <= 0:
        raise ValueError("needs a > 0")
    s = model.grid
    r = np.sqrt(s * s + model.a**4)
    psi = asd_potential_jets(s, model.a, normalization)[0]
    return RadialProfile(s, psi, 2 * normalization / r, -2 * normalization * s * s / r**3)


def asd_form(model: ALEModel, normalization: float, points) -> np.ndarray:
    s = np.sum(np.asarray(points, dtype=float) ** 2, axis=-1)
    psi, d1, d2, _ = asd_potential_jets(s, model.a, normalization)
    return ddbar_product(points, psi, d1, d2, qconst=1.0, g_radial=asd_radial_second(s, model.a, normalization))


def radial_points(s) -> np.ndarray:
    """Points (sqrt(s), 0, 0, 0); radial quantities are U(2)-invariant."""
    s = np.asarray(s, dtype=float)
    pts = np.zeros(s.shape + (4,))
    pts[..., 0] = np.sqrt(s)
    return pts


def radial_pairing(model: ALEModel, normalization: float) -> float:
    """Quadrature of (1 / 4 pi^2 m) * int alpha ^ alpha over the model, alpha = i ddbar psi."""
    s = model.grid
    alpha = asd_form(model, normalization, radial_points(s))
    density = wedge(alpha, alpha)  # coefficient of dx1234
    # d^4x = pi^2 s ds = pi^2 s^2 dt on radial functions
    integral = np.pi**2 * simpson(density * s * s, x=np.log(s))
    return float(model.volume_normalization * integral)


def radial_pairing_closed_form(model: ALEModel, normalization: float, s_lo=None, s_hi=None) -> float:
    """Same pairing from the boundary values of w = s psi': (w(hi)^2 - w(lo)^2) / m."""
    s_lo = model.grid[0] if s_lo is None else s_lo
    s_hi = model.grid[-1] if s_hi is None else s_hi
    a4 = model.a**4
    w = lambda s: 2 * normalization / np.sqrt(s * s + a4)  # noqa: E731
    return float((w(s_hi) ** 2 - w(s_lo) ** 2) / model.gamma_order)


def calibrated_normalization(model: ALEModel, target: float) -> float:
    """C with total pairing equal to `target` (< 0); the full-space pairing is -2 C^2 / a^4."""
    if target >= 0:
        raise ValueError("anti-self-dual pairing target must be negative")
    return model.a**2 * np.sqrt(-target / 2.0)


def asd_check(form: TwoFormAtPoint, floor: float = 1e-300) -> float:
    """|*a + a| / max(|a|, floor) for the form's own metric."""
    res = form_norm(star(form.components, form.metric) + form.components, form.metric)
    return float(res / max(float(form_norm(form.components, form.metric)), floor))


def asd_residuals(comps, metric) -> np.ndarray:
    """Vectorized asd_check over stacked forms and metrics."""
    num = form_norm(star(comps, metric) + comps, metric)
    return num / np.maximum(form_norm(comps, metric), 1e-300)


def sample_points(rng: np.random.Generator, n: int, s_lo: float, s_hi: float) -> np.ndarray:
    """Random points of C^2 with log-uniform s in [s_lo, s_hi] and uniform direction."""
    dirs = rng.normal(size=(n, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    s = np.exp(rng.uniform(np.log(s_lo), np.log(s_hi), size=n))
    return dirs * np.sqrt(s)[:, None]
