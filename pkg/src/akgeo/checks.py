"""Named residual checks: the identity suite behind reports and acceptance runs.

Each check evaluates one structural identity at a chart point and returns the
max coefficient norm of its defect, so a suite is just a dict of name -> float
that downstream callers compare against a tolerance.
"""

import numpy as np

from .frames import (
    AbelianField,
    FrameField,
    PerturbedFrame,
    Su2Field,
    frame_field,
    sample_points,
)
from .gauge import (
    Su3Data,
    coeffs_from_pqrs,
    el_identity_residual,
    expansion_identity_residual,
)
from .geometry import (
    bianchi_residual,
    curvature,
    eps_contraction_form,
    extract_u2,
    scalar_curvature,
    solve_levi_civita,
    structure_forms,
    su2_curvature,
    torsion_residual,
    u2_structure_residual,
)

CHECK_NAMES = (
    "torsion_free",
    "dd_zero",
    "algebraic_bianchi",
    "u2_structure_equation",
    "kahler_form_derivative",
    "volume_quartic_identity",
    "canonical_form_derivative",
    "sigma_covariant_constancy",
    "curvature_trace_identity",
    "insertion_expansion",
    "direct_field_equations",
)

# residuals of the named identities are structural: they hold on every frame,
# integrable or not, so one tolerance covers all manifolds
SUITE_TOL = 1e-8

SCALAR_ANCHORS = {"flat": (0.0, 1e-12), "s2xr2": (2.0, 1e-8), "cp2": (12.0, 1e-6)}


def point_checks(ff: FrameField, x, gauge_seed=0):
    """All named residuals at one chart point; returns name -> defect."""
    uc = ff.at(x, 2)
    cof = uc.coframe()
    w = solve_levi_civita(cof)
    R = curvature(w)
    u2 = extract_u2(w)
    sf = structure_forms(uc)
    T, Tb = u2.torsion, u2.torsion.conj()
    Om, Omb = sf.canonical, sf.canonical.conj()

    out = {
        "torsion_free": torsion_residual(cof, w),
        "dd_zero": cof.e.d().d().max_abs(),
        "algebraic_bianchi": bianchi_residual(R, cof),
        "u2_structure_equation": u2_structure_residual(uc, u2),
        "kahler_form_derivative": (
            sf.kahler.d() + 0.5j * Tb.wedge(Om) - 0.5j * T.wedge(Omb)
        ).max_abs(),
        "volume_quartic_identity": (
            sf.psi_dag_psi.wedge(sf.psi_dag_psi) + 8.0 * sf.vol
        ).max_abs(),
        "canonical_form_derivative": (
            Om.d() + 2.0 * u2.u1.wedge(Om) + 1j * T.wedge(sf.kahler)
        ).max_abs(),
        "sigma_covariant_constancy": (
            sf.sigma.d() + u2.su2.wedge(sf.sigma) - sf.sigma.wedge(u2.su2)
        ).max_abs(),
    }

    F = su2_curvature(u2).matrix
    traced = uc.psi.dagger().wedge(F.wedge(uc.psi))
    out["curvature_trace_identity"] = (
        traced + eps_contraction_form(R, cof).truncated(traced.depth)
    ).max_abs()

    data = Su3Data(
        Su2Field.seeded(gauge_seed).at(x, 2),
        AbelianField.seeded(gauge_seed + 1).at(x, 2),
        uc.psi,
    )
    out["insertion_expansion"] = max(
        expansion_identity_residual(data, c) for c in (0.5, 2.0)
    )
    out["direct_field_equations"] = max(
        el_identity_residual(data, c) for c in (0.5, 2.0)
    )
    return out


def coefficient_relation_residual(draws=50, seed=0):
    """Max |3 lam - mu + 4 nu| over seeded coefficient draws."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        p, q, r, s = rng.uniform(-10.0, 10.0, size=4)
        lam, mu, nu = coeffs_from_pqrs(p, q, r, s)
        worst = max(worst, abs(3.0 * lam - mu + 4.0 * nu))
    return worst


def run_suite(manifold, seed=0, points=20, tol=SUITE_TOL):
    """Identity suite over sampled points of one manifold chart.

    Returns a report dict with one row per check (max residual over the
    points) plus the coefficient relation and, where the chart has a known
    scalar curvature, the anchor comparison.
    """
    ff = frame_field(manifold, seed=seed)
    worst = {name: 0.0 for name in CHECK_NAMES}
    for x in sample_points(manifold, points, seed=seed):
        for name, value in point_checks(ff, x, gauge_seed=seed).items():
            worst[name] = max(worst[name], value)

    rows = [
        {"name": name, "residual": worst[name], "pass": bool(worst[name] <= tol)}
        for name in CHECK_NAMES
    ]
    rel = coefficient_relation_residual(seed=seed)
    rows.append({"name": "coefficient_relation", "residual": rel,
                 "pass": bool(rel <= 1e-12)})

    report = {"manifold": manifold, "seed": seed, "points": points,
              "tol": tol, "checks": rows}
    if manifold in SCALAR_ANCHORS:
        target, stol = SCALAR_ANCHORS[manifold]
        defect = scalar_anchor_defect(manifold, seed=seed, points=points)
        report["scalar_curvature"] = {
            "target": target, "max_defect": defect, "tol": stol,
            "pass": bool(defect <= stol),
        }
    report["pass"] = all(row["pass"] for row in rows) and (
        report.get("scalar_curvature", {"pass": True})["pass"]
    )
    return report


def scalar_anchor_defect(manifold, seed=0, points=20):
    """Max |s - target| over sampled points of a known-curvature chart."""
    target, _ = SCALAR_ANCHORS[manifold]
    ff = frame_field(manifold, seed=seed)
    worst = 0.0
    for x in sample_points(manifold, points, seed=seed):
        cof = ff.coframe_at(x, 2)
        s = scalar_curvature(curvature(solve_levi_civita(cof)), cof)
        worst = max(worst, abs(s - target))
    return worst


def random_frame_suite(frames=50, seed=0, amplitude=0.1):
    """Max residual per check over seeded random perturbed frames.

    One chart point per frame; frame k uses seed (seed + k) for both the
    frame entries and the gauge data, so reruns are deterministic.
    """
    worst = {name: 0.0 for name in CHECK_NAMES}
    for k in range(frames):
        ff = PerturbedFrame.seeded(seed + k, amplitude=amplitude)
        x = sample_points("random", 1, seed=seed + k)[0]
        for name, value in point_checks(ff, x, gauge_seed=seed + k).items():
            worst[name] = max(worst[name], value)
    return worst
