"""Stage runners shared by the command line front-end.

Each stage returns a StageResult: pass/fail rows against fixed thresholds plus the
sweep reports whose rows become CSV tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cohomled as cl
from .alemodel import (
    ALEModel,
    asd_form,
    asd_residuals,
    calibrated_normalization,
    eh_potential,
    hamiltonian_form,
    integrate_eh_ode,
    radial_pairing,
    ricci_flat_residual,
    sample_points,
)
from .exactalg import ExactMatrix
from .forms import (
    RadialTwoForm,
    bubbling_diagnostic,
    build_asd_torus_form,
    build_bubble_form,
    build_bubbling_families,
    c1_reference,
    closedness_residual,
    decay_table,
    eh_reference,
    inner_asd_residual,
    type11_residual,
)
from .gluing import SweepReport, build_glued_metric, decay_sweep, f_sup_ratios
from .masolver import ContractionError, picard_solve, scaling_exponent_sweep
from .orbifold import (
    CompatibilityError,
    LatticeGroupPair,
    enumerate_singular_points,
    invariant_asd_dimension,
    k3_count,
)


@dataclass
class Check:
    stage: str
    name: str
    anchor: str  # what the check measures
    passed: bool
    detail: str = ""


@dataclass
class StageResult:
    stage: str
    checks: list[Check] = field(default_factory=list)
    reports: list[SweepReport] = field(default_factory=list)
    text: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name: str, anchor: str, passed: bool, detail: str = ""):
        self.checks.append(Check(self.stage, name, anchor, bool(passed), detail))


def _g(x) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# classification


def compatibility_failure(pair: LatticeGroupPair) -> str | None:
    """Text naming the first generator that does not preserve the lattice, or None."""
    from .orbifold import _elem

    for k, g in enumerate(pair.group_generators):
        try:
            pair.integer_action(_elem(g))
        except CompatibilityError as exc:
            return f"generator {k + 1} {g}: {exc}"
    return None


def classification_table(pair: LatticeGroupPair) -> str:
    points = enumerate_singular_points(pair)
    lines = ["representative\tstabilizer\tdynkin\tN\torbit"]
    for p in points:
        z, w = p.representative
        kind, n = p.dynkin
        lines.append(f"({z}, {w})\t{p.stabilizer_type}\t{kind}{n}\t{p.n_irreps}\t{p.orbit_size}")
    lines.append(f"d_gamma={invariant_asd_dimension(pair)}")
    lines.append(f"count={k3_count(pair, points)}")
    return "\n".join(lines) + "\n"


def run_classify(pair: LatticeGroupPair) -> StageResult:
    res = StageResult("classify")
    bad = compatibility_failure(pair)
    if bad is not None:
        res.add("compatibility", "lattice preserved by the group", False, bad)
        return res
    points = enumerate_singular_points(pair)
    count = k3_count(pair, points)
    res.text = classification_table(pair)
    res.add("k3_count", "d_Gamma + sum N = 19", count == 19, f"count={count}, points={len(points)}")
    return res


# ---------------------------------------------------------------------------
# model space


def run_model(model: ALEModel, seed: int = 0, ode_tol=1e-8, ricci_tol=1e-10, pairing_tol=1e-6, asd_tol=1e-8) -> StageResult:
    res = StageResult("model")
    s = model.grid
    exact = eh_potential(model.a, s)
    numeric = integrate_eh_ode(model.a, s)
    closed = np.sqrt(s * s + model.a**4) / (2 * s)
    err = float(np.max(np.abs(numeric / closed - 1)))
    res.add("eh_ode", "radial ODE vs closed form", err < ode_tol, f"sup rel err={_g(err)}")
    ric = ricci_flat_residual(exact)
    res.add("ricci_flat", "closed form solves the flat volume equation", ric < ricci_tol, f"residual={_g(ric)}")

    target = -cl.cartan_inverse("A", 1)[0, 0]
    c = calibrated_normalization(model, float(target))
    pairing = radial_pairing(model, c)
    res.add(
        "asd_pairing",
        "self-pairing of the calibrated ASD generator",
        abs(pairing - float(target)) < pairing_tol,
        f"pairing={_g(pairing)} target={target}",
    )
    rng = np.random.default_rng(seed)
    pts = sample_points(rng, 100, 1e-2 * model.a**2, 1e2 * model.a**2)
    g = model.metric(pts)
    r_alpha = float(np.max(asd_residuals(asd_form(model, c, pts), g)))
    res.add("asd_alpha", "i ddbar psi anti-self-dual", r_alpha < asd_tol, f"max residual={_g(r_alpha)}")
    for alpha in (1, 2, 3):
        r_mu = float(np.max(asd_residuals(hamiltonian_form(model, pts, alpha), g)))
        res.add(f"asd_hamiltonian_{alpha}", "i ddbar of the Hamiltonian anti-self-dual", r_mu < asd_tol, f"max residual={_g(r_mu)}")
    return res


# ---------------------------------------------------------------------------
# numeric sweeps


def run_gluing(model: ALEModel, eps_list) -> StageResult:
    res = StageResult("gluing")
    for k, target, tol in [(0, 2.0, 0.15), (1, 1.5, 0.2)]:
        rep = decay_sweep(model, eps_list, k)
        slope = rep.slopes["sup"]
        rep.checks["slope"] = abs(slope - target) <= tol
        res.reports.append(rep)
        res.add(f"decay_k{k}", f"annulus decay exponent {target}", rep.checks["slope"], f"slope={_g(slope)}")
    ratios = f_sup_ratios(model, eps_list)
    f_rep = SweepReport(stage="gluing_f")
    f_rep.rows = [{"epsilon": e, "f_sup_over_eps2": r} for e, r in zip(eps_list, ratios)]
    stable = max(ratios) / min(ratios) < 2
    f_rep.checks["stable"] = stable
    res.reports.append(f_rep)
    res.add("f_over_eps2", "sup|f| / eps^2 stable within a factor 2", stable, f"ratios={[_g(r) for r in ratios]}")
    return res


def run_masolver(model: ALEModel, eps_list, deltas=(-1.0, -0.5), tol=1e-10, residual_tol=1e-9) -> StageResult:
    res = StageResult("masolver")
    try:
        for eps in eps_list:
            sol = picard_solve(build_glued_metric(model, eps), tol=tol)
            worst = max(sol.contraction_history, default=0.0)
            res.add(f"contraction_eps{_g(eps)}", "Picard contraction ratio <= 0.5", worst <= 0.5, f"max ratio={_g(worst)}")
            res.add(f"residual_eps{_g(eps)}", "final equation residual", sol.final_residual < residual_tol, f"residual={_g(sol.final_residual)}")
        for delta in deltas:
            rep = scaling_exponent_sweep(model, eps_list, delta)
            res.reports.append(rep)
            res.add(
                f"scaling_delta{_g(delta)}",
                f"weighted C0 norm exponent >= {_g(3 - delta / 2 - 0.25)}",
                rep.checks["slope"],
                f"slope={_g(rep.slopes['c0_delta'])}",
            )
    except ContractionError as exc:
        res.add("contraction", "Picard iteration contracts", False, str(exc))
    return res


def run_forms(model: ALEModel, eps_list) -> StageResult:
    res = StageResult("forms")
    c = calibrated_normalization(model, float(-cl.cartan_inverse("A", 1)[0, 0]))
    tables = [("bubble", {"normalization": c})] + [("torus_asd", {"alpha_index": a}) for a in (1, 2, 3)]
    for kind, kw in tables:
        rep = decay_table(kind, model, eps_list, **kw)
        res.reports.append(rep)
        for name, ok in rep.checks.items():
            detail = ""
            key = f"{name}_constant_ratio"
            if key in rep.slopes:
                detail = f"constant ratio={_g(rep.slopes[key])}"
            elif name == "annulus_wedge_slope":
                detail = f"slope={_g(rep.slopes['annulus_wedge'])}"
            res.add(f"{rep.stage}:{name}", "epsilon-uniform decay constant", ok, detail)
    eps = eps_list[-1]
    metric = build_glued_metric(model, eps)
    built = [build_bubble_form(model, eps, c, metric)] + [build_asd_torus_form(model, eps, a, metric) for a in (1, 2, 3)]
    for form in built:
        tag = form.kind + (f"_{form.alpha_index}" if form.alpha_index else "")
        closed = closedness_residual(form)
        res.add(f"closed:{tag}", "discrete exterior derivative vanishes", closed < 1e-6, f"residual={_g(closed)}")
        t11 = type11_residual(form)
        res.add(f"type11:{tag}", "type (1,1)", t11 < 1e-12, f"residual={_g(t11)}")
        asd = inner_asd_residual(form)
        res.add(f"asd_inner:{tag}", "anti-self-dual on the core", asd < 1e-8, f"residual={_g(asd)}")
    return res


def run_bubbling(model: ALEModel, eps_list) -> StageResult:
    res = StageResult("bubbling")
    c = calibrated_normalization(model, float(-cl.cartan_inverse("A", 1)[0, 0]))
    fam = build_bubbling_families(model, eps_list, c)
    glued = []
    for eps in eps_list:
        m = build_glued_metric(model, eps)
        glued.append(RadialTwoForm.from_potential(eps, m.s, m.glued_potential.dt1, m.glued_potential.dt2, power=2))
    cases = [
        ("omega_eps", glued, (0.5, 0.5), eh_reference(model)),
        ("omega_tilde", fam.omega_tilde, (0.5, 0.5), eh_reference(model)),
        ("xi_tilde_prime", fam.xi_tilde_prime, (0.0, 0.0), c1_reference(model, c)),
    ]
    for name, family, torus_ref, bubble_ref in cases:
        for mode, ref in [("torus_side", torus_ref), ("bubble_side", bubble_ref)]:
            rep = bubbling_diagnostic(family, mode, ref, model=model)
            rep.stage = f"bubbling_{name}_{mode}"
            for row in rep.rows:
                row["family"] = name
            res.reports.append(rep)
            vals = [r["sup_discrepancy"] for r in rep.rows]
            res.add(f"{name}:{mode}", "discrepancy decreasing to zero", rep.passed, f"values={[_g(v) for v in vals]}")
    for hp in fam.projections:
        res.add(
            f"projection_asd_eps{_g(hp.epsilon)}",
            "harmonic projection is anti-self-dual",
            hp.asd_residual < 1e-8,
            f"residual={_g(hp.asd_residual)}",
        )
    return res


# ---------------------------------------------------------------------------
# exact ledger


def expected_cup_entry(data: cl.IntersectionData, i: int, j: int) -> Fraction:
    """The cup-product table written out case by case."""
    b = data.basis
    if i < 3 or j < 3:
        return data.vol if i == j else Fraction(0)
    if i < b.bubble_offset or j < b.bubble_offset:
        return -data.vol if i == j else Fraction(0)
    offsets = []
    start = b.bubble_offset
    for p, d in enumerate(b.singular_data):
        offsets.append((start, start + d.rank, p))
        start += d.rank
    (si, _, pi), = [o for o in offsets if o[0] <= i < o[1]]
    (sj, _, pj), = [o for o in offsets if o[0] <= j < o[1]]
    if pi != pj:
        return Fraction(0)
    return -data.L[pi][i - si, j - sj]


def run_ledger(data: cl.IntersectionData, eps_values) -> StageResult:
    res = StageResult("ledger")
    b = data.basis
    res.add("dimension", "basis dimension 22", b.dimension == 22, f"dimension={b.dimension}")
    cup = cl.cup_matrix(data)
    table = ExactMatrix([[expected_cup_entry(data, i, j) for j in range(b.dimension)] for i in range(b.dimension)])
    res.add("cup_table", "cup products match the table", cup == table)
    q = data.Q
    res.add("q_orthogonal", "Q . [omega_0] = 0", cl.cup_product(q, cl.CohomClass.unit(b, 0), data) == 0)
    q2 = cl.cup_product(q, q, data)
    base = None
    for eps in eps_values:
        eps = Fraction(eps)
        tag = cl.fraction_str(eps)
        w = cl.w_epsilon(data, eps)
        res.add(f"w_eps={tag}", "W = 1 + eps^4 Q^2 / vol", w == 1 + eps**4 * q2 / data.vol and w < 1, f"W={cl.fraction_str(w)}")
        classes = cl.harmonic_classes(data, eps)
        minus = [m.coords for m in classes.omega_minus]
        base = minus if base is None else base
        res.add(f"omega_minus_eps={tag}", "[omega~^-] independent of eps", minus == base)
        closed = all(classes.xi[k] == cl.xi_class_closed_form(data, eps, *k) for k in classes.xi)
        res.add(f"xi_class_eps={tag}", "[Xi~] closed form", closed)
        res.add(f"lambda_minus_eps={tag}", "lambda = 0 for omega^- forms", all(x == 0 for x in classes.lam_minus))
        gram = cl.gram_matrix(data, eps)
        asd_dim = gram.nrows
        res.add(f"gram_dim_eps={tag}", "ASD block dimension 19", asd_dim == 19, f"dim={asd_dim}")
        res.add(f"gram_pd_eps={tag}", "Gram matrix positive definite", cl.is_positive_definite(gram))
        via_cup = cl.gram_from_cup(data, eps)
        same = gram == via_cup
        detail = ""
        if not same:
            diffs = [(i, j) for i in range(asd_dim) for j in range(asd_dim) if gram[i, j] != via_cup[i, j]]
            i, j = diffs[0]
            detail = (
                f"{len(diffs)} entries differ; e.g. ({i},{j}): formula {cl.fraction_str(gram[i, j])}"
                f" vs -cup {cl.fraction_str(via_cup[i, j])}"
            )
        res.add(f"gram_vs_cup_eps={tag}", "Gram formulas equal -cup of the classes", same, detail)
        res.add(f"gram_cup_pd_eps={tag}", "-cup Gram positive definite", cl.is_positive_definite(via_cup))
    res.text = cl.ledger_report(data, eps_values)
    return res
