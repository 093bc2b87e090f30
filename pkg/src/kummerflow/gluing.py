"""Approximate Kahler metric obtained by gluing a scaled Eguchi-Hanson core into flat space.

Radially, with s = r^2 and x = s / eps^2,

    Phi_eps(s) = s/2 + chi(s) * eps^2 (phi(x) - x/2),

where chi(s) = rho(sqrt(s / eps)) cuts off between s = 1.21 eps and s = 3.61 eps.
The discrepancy f_eps = log(omega_eps^2 / (1/2) Omega ^ conj(Omega)) is
log(4 Phi' (Phi' + s Phi'')), and vanishes identically outside the cutoff annulus.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alemodel import ALEModel, RadialProfile, eh_deviation_jets, log_grid, radial_points
from .flatforms import OMEGA0, ddbar_product, form_norm

RHO_START = 1.1
RHO_END = 1.9
S_OUTER = 1.0


class DegenerateGluingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# cutoffs


def rho_jets(u) -> tuple[np.ndarray, ...]:
    """rho and its first three derivatives; rho = 1 - (6x^5 - 15x^4 + 10x^3), x = (u - 1.1)/0.8."""
    u = np.asarray(u, dtype=float)
    width = RHO_END - RHO_START
    x = np.clip((u - RHO_START) / width, 0.0, 1.0)
    inside = (u > RHO_START) & (u < RHO_END)
    r0 = 1 - x**3 * (10 - 15 * x + 6 * x * x)
    r1 = np.where(inside, -30 * x * x * (1 - x) ** 2 / width, 0.0)
    r2 = np.where(inside, -60 * x * (1 - x) * (1 - 2 * x) / width**2, 0.0)
    r3 = np.where(inside, -60 * (1 - 6 * x + 6 * x * x) / width**3, 0.0)
    return r0, r1, r2, r3


def cutoff(t: float, r) -> np.ndarray:
    """chi_t(r) = rho(r / t)."""
    if t <= 0:
        raise ValueError("cutoff scale must be positive")
    return rho_jets(np.asarray(r, dtype=float) / t)[0]


def chi_jets(s, epsilon: float) -> tuple[np.ndarray, ...]:
    """chi(s) = rho(sqrt(s/eps)) and its first three s-derivatives."""
    s = np.asarray(s, dtype=float)
    u = np.sqrt(s / epsilon)
    r0, r1, r2, r3 = rho_jets(u)
    u1 = u / (2 * s)
    u2 = -u / (4 * s * s)
    u3 = 3 * u / (8 * s**3)
    return r0, r1 * u1, r2 * u1 * u1 + r1 * u2, r3 * u1**3 + 3 * r2 * u1 * u2 + r1 * u3


def annulus_bounds(epsilon: float) -> tuple[float, float]:
    """Support of the cutoff derivative in s."""
    return RHO_START**2 * epsilon, RHO_END**2 * epsilon


@dataclass(frozen=True)
class WeightFunction:
    epsilon: float

    def __call__(self, s) -> np.ndarray:
        return np.clip(np.sqrt(np.asarray(s, dtype=float)), self.epsilon, 1.0)


# ---------------------------------------------------------------------------
# glued potential


def glued_jets(s, model: ALEModel, epsilon: float) -> dict[str, np.ndarray]:
    """Derivatives of Phi_eps at s.

    Keys: phi, d1, d2, d3 (s-derivatives), t1, t2, t3 (t = log s derivatives), chi.
    t-derivatives are computed without cancellation in the core.
    """
    s = np.asarray(s, dtype=float)
    e2 = epsilon * epsilon
    x = s / e2
    h0, h1, h2, h3 = eh_deviation_jets(x, model.a)
    h0 = e2 * h0
    h2 = h2 / e2
    h3 = h3 / (e2 * e2)
    c0, c1, c2, c3 = chi_jets(s, epsilon)
    d1 = 0.5 + c1 * h0 + c0 * h1
    d2 = c2 * h0 + 2 * c1 * h1 + c0 * h2
    d3 = c3 * h0 + 3 * c2 * h1 + 3 * c1 * h2 + c0 * h3
    t1 = s * d1
    t2 = s * d1 + s * s * d2
    t3 = s * d1 + 3 * s * s * d2 + s**3 * d3
    core = c0 == 1.0
    if model.a > 0 and np.any(core):
        a4 = model.a**4
        xc = x[core]
        r = np.sqrt(xc * xc + a4)
        t1[core] = e2 * r / 2
        t2[core] = e2 * xc * xc / (2 * r)
        t3[core] = e2 * (xc * xc / r - xc**4 / (2 * r**3))
    return {
        "phi": 0.5 * s + c0 * h0,
        "d1": d1,
        "d2": d2,
        "d3": d3,
        "t1": t1,
        "t2": t2,
        "t3": t3,
        "chi": c0,
    }


@dataclass(frozen=True)
class GluedMetric:
    epsilon: float
    model: ALEModel
    glued_potential: RadialProfile
    cutoff_record: np.ndarray
    f_profile: RadialProfile
    t3: np.ndarray = field(repr=False)

    @property
    def s(self) -> np.ndarray:
        return self.glued_potential.s

    @property
    def weight(self) -> WeightFunction:
        return WeightFunction(self.epsilon)

    def jets(self, s) -> dict[str, np.ndarray]:
        return glued_jets(s, self.model, self.epsilon)

    def kahler_form(self, points) -> np.ndarray:
        s = np.sum(np.asarray(points, dtype=float) ** 2, axis=-1)
        j = self.jets(s)
        return ddbar_product(points, j["phi"], j["d1"], j["d2"], qconst=1.0, g_radial=j["t2"] / s)

    def volume_ratio(self) -> np.ndarray:
        """e^{f_eps} on the grid."""
        return np.exp(self.f_profile.values)


def default_glue_grid(model: ALEModel, epsilon: float, nodes: int = 2048) -> np.ndarray:
    scale = model.a**2 if model.a > 0 else 1.0
    return log_grid(1e-4 * scale * epsilon**2, S_OUTER, nodes)


def build_glued_metric(model: ALEModel, epsilon: float, grid: np.ndarray | None = None) -> GluedMetric:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if annulus_bounds(epsilon)[1] >= S_OUTER:
        raise DegenerateGluingError(f"epsilon = {epsilon} too large: the cutoff annulus leaves s <= {S_OUTER}")
    s = default_glue_grid(model, epsilon) if grid is None else np.asarray(grid, dtype=float)
    j = glued_jets(s, model, epsilon)
    bad = (j["t1"] <= 0) | (j["t2"] <= 0)
    if np.any(bad):
        raise DegenerateGluingError(
            f"glued metric degenerate at s = {s[bad][0]:.6g}; epsilon = {epsilon} is too large"
        )
    chi = j["chi"]
    f = np.log(4 * j["t1"] * j["t2"] / (s * s))
    # Ricci-flat core and flat exterior: f vanishes identically there
    f = np.where((chi == 1.0) | (chi == 0.0), 0.0, f)
    return GluedMetric(
        epsilon=epsilon,
        model=model,
        glued_potential=RadialProfile(s, j["phi"], j["t1"], j["t2"]),
        cutoff_record=chi,
        f_profile=RadialProfile(s, f),
        t3=j["t3"],
    )


def w_epsilon_quadrature(metric: GluedMetric) -> float:
    """W = int omega_eps^2 / int (1/2) Omega ^ conj(Omega) over the model domain, by quadrature.

    In t = log s the radial volume densities are s^2 (flat) and 4 Phi_t Phi_tt (glued).
    """
    from scipy.integrate import simpson

    s = metric.s
    t = np.log(s)
    dens = 4 * metric.glued_potential.dt1 * metric.glued_potential.dt2
    flat = simpson(s * s, x=t)
    glued = simpson(dens, x=t)
    return float(glued / flat)


def w_epsilon_exact(metric: GluedMetric) -> float:
    """Closed form of the same ratio: (4 Phi_t(S)^2 - 4 Phi_t(s0)^2) / (S^2 - s0^2)."""
    s = metric.s
    p = metric.glued_potential.dt1
    return float((4 * p[-1] ** 2 - 4 * p[0] ** 2) / (s[-1] ** 2 - s[0] ** 2))


# ---------------------------------------------------------------------------
# weighted norms of radial functions


def radial_derivative_norms(metric: GluedMetric, u_t1, u_t2) -> tuple[np.ndarray, np.ndarray]:
    """|du|_g and |Hess u|_g for a radial function with t-derivatives u_t1, u_t2.

    At (sqrt(s), 0) the metric is diagonal in (dz, dw) with entries A = Phi_tt / s and
    B = Phi_t / s; the holomorphic Hessian has the single entry
    (u_tt - u_t Phi_ttt / Phi_tt) / s and the mixed Hessian is diag(u_tt / s, u_t / s).
    """
    p1 = metric.glued_potential.dt1
    p2 = metric.glued_potential.dt2
    p3 = metric.t3
    grad = np.sqrt(2 * u_t1**2 / p2)
    hol = u_t2 - u_t1 * p3 / p2
    hess = np.sqrt(2 * (hol**2 / p2**2 + u_t2**2 / p2**2 + u_t1**2 / p1**2))
    return grad, hess


def weighted_ck_norm(profile: RadialProfile, metric: GluedMetric, k: int, delta: float) -> float:
    """max over j <= k of sup sigma^(-delta + j) |nabla^j u|_g for a radial function u."""
    if k > 2:
        raise ValueError("weighted norms are implemented for k <= 2 only")
    if k < 0:
        raise ValueError("k must be non-negative")
    if not np.array_equal(profile.s, metric.s):
        raise ValueError("profile and metric live on different grids")
    sigma = metric.weight(profile.s)
    terms = [np.abs(profile.values)]
    if k >= 1:
        u1, u2 = profile.t_derivatives()
        grad, hess = radial_derivative_norms(metric, u1, u2)
        terms.append(grad)
        terms.append(hess)
    return float(max(np.max(sigma ** (-delta + j) * terms[j]) for j in range(k + 1)))


# ---------------------------------------------------------------------------
# decay sweeps


@dataclass
class SweepReport:
    stage: str
    rows: list[dict] = field(default_factory=list)
    slopes: dict[str, float] = field(default_factory=dict)
    slope_stderr: dict[str, float] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def fit_slope(eps, values) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(eps) and its standard error."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = values > 0
    if ok.sum() < 2:
        raise ValueError("fewer than 2 valid points for the fit")
    x, y = np.log(eps[ok]), np.log(values[ok])
    coeffs, cov = np.polyfit(x, y, 1, cov=True) if ok.sum() > 2 else (np.polyfit(x, y, 1), np.zeros((2, 2)))
    return float(coeffs[0]), float(np.sqrt(max(cov[0, 0], 0.0)))


def glued_deviation_form(points, model: ALEModel, epsilon: float) -> np.ndarray:
    """omega_eps - omega_0 = i ddbar(chi h) at arbitrary points."""
    s = np.sum(np.asarray(points, dtype=float) ** 2, axis=-1)
    j = glued_jets(s, model, epsilon)
    return ddbar_product(points, j["phi"] - 0.5 * s, j["d1"] - 0.5, j["d2"], qconst=1.0)


def annulus_samples(epsilon: float, n: int = 400) -> np.ndarray:
    return np.linspace(epsilon, 4 * epsilon, n)


def flat_derivative_norm(form_fn, points, k: int, step: float) -> np.ndarray:
    """|nabla_0^k form| at points (k = 0, 1) with central differences in each coordinate."""
    if k == 0:
        return form_norm(form_fn(points))
    if k != 1:
        raise ValueError("flat derivative norms are implemented for k <= 1")
    total = np.zeros(len(points))
    for e in np.eye(4):
        d = (form_fn(points + step * e) - form_fn(points - step * e)) / (2 * step)
        total += np.sum(d * d, axis=-1)
    return np.sqrt(total)


def decay_sweep(model: ALEModel, eps_list, k: int, samples: int = 400) -> SweepReport:
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    report = SweepReport(stage=f"gluing_k{k}")
    sups = []
    for eps in eps_list:
        s = annulus_samples(eps, samples)
        pts = radial_points(s)
        vals = flat_derivative_norm(
            lambda p: glued_deviation_form(p, model, eps), pts, k, step=1e-4 * np.sqrt(eps)
        )
        sup = float(np.max(vals))
        sups.append(sup)
        report.rows.append({"epsilon": eps, "k": k, "sup_value": sup})
    if all(v == 0 for v in sups):
        report.notes.append("exact vanishing")
        report.slopes["sup"] = float("nan")
    else:
        slope, err = fit_slope(eps_list, sups)
        report.slopes["sup"] = slope
        report.slope_stderr["sup"] = err
    for row in report.rows:
        row["fitted_slope"] = report.slopes["sup"]
    return report


def f_sup_ratios(model: ALEModel, eps_list) -> list[float]:
    """sup |f_eps| / eps^2 for each epsilon."""
    return [float(np.max(np.abs(build_glued_metric(model, e).f_profile.values))) / e**2 for e in eps_list]


def flat_reference_form(n: int) -> np.ndarray:
    return np.tile(OMEGA0, (n, 1))
