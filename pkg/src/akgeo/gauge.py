"""Symmetry-broken gauge sector: a composite su(3) connection over U(2) data.

An su(2) gauge field A, an imaginary abelian field a and a C^2-valued
1-form psi are bundled into a single traceless anti-Hermitian 3x3
connection.  Weight-matrix insertions under the trace of F ^ F break the
symmetry down to U(2) and produce, after discarding topological and
exact terms, a three-coupling functional of (A, a, psi).  This module
provides the block algebra, the pointwise expansion and Euler-Lagrange
identities of that construction, the canonical data induced by a
unitary coframe, and the residuals of the metric-variable field
equations.

Couplings are reported as (lam, mu, nu) multiplying
psi^dagger F psi, da psi^dagger psi and (psi^dagger psi)^2; every
insertion produces couplings on the plane 3 lam - mu + 4 nu = 0.
"""

from dataclasses import dataclass

import numpy as np

from .forms import MatrixForm, residual, scalar_identity
from .frames import Coframe, FrameField, UnitaryCoframe
from .geometry import (
    U2Data,
    curvature,
    eps_contraction_form,
    extract_u2,
    frame_components_2form,
    fd_scalar_gradient,
    ricci_data,
    scalar_curvature,
    solve_levi_civita,
    structure_forms,
    type_split_2form,
    type_split_sym,
)

SQRT2 = float(np.sqrt(2.0))


# -- composite connection ------------------------------------------------------


@dataclass
class Su3Data:
    """Component fields of the composite connection.

    A : su(2)-valued 1-form (2x2, anti-Hermitian traceless).
    a : imaginary scalar 1-form (1x1).
    psi : complex 2x1 1-form.
    """

    A: MatrixForm
    a: MatrixForm
    psi: MatrixForm

    def assemble(self) -> MatrixForm:
        """The 3x3 connection [[A + I a, psi], [-psi^dagger, -2a]]."""
        ia = scalar_identity(2, self.a)
        return MatrixForm.from_blocks([
            [self.A + ia, self.psi],
            [-1.0 * self.psi.dagger(), -2.0 * self.a],
        ])


@dataclass
class Su3Curvature:
    """Curvature blocks of the composite connection.

    matrix2 : 2x2 block F + I da - psi psi^dagger, F = dA + A ^ A.
    column : 2x1 block D psi + 3 a psi, D psi = d psi + A psi.
    scalar : 1x1 block -2 da - psi^dagger psi.
    """

    matrix2: MatrixForm
    column: MatrixForm
    scalar: MatrixForm

    def assemble(self) -> MatrixForm:
        return MatrixForm.from_blocks([
            [self.matrix2, self.column],
            [-1.0 * self.column.dagger(), self.scalar],
        ])


def connection_curvature(cal_a: MatrixForm) -> MatrixForm:
    return cal_a.d() + cal_a.wedge(cal_a)


def su2_field_curvature(A: MatrixForm) -> MatrixForm:
    return A.d() + A.wedge(A)


def covariant_d(A: MatrixForm, X: MatrixForm) -> MatrixForm:
    """dX + A ^ X - X ^ A for a square matrix form X in the adjoint."""
    return X.d() + A.wedge(X) - X.wedge(A)


def curvature_blocks(data: Su3Data) -> Su3Curvature:
    """Curvature from the analytic block formulas.

    Agrees with connection_curvature(data.assemble()); block_residual
    pins the two code paths against each other.
    """
    A, a, psi = data.A, data.a, data.psi
    da = a.d()
    matrix2 = su2_field_curvature(A) + scalar_identity(2, da) - psi.wedge(psi.dagger())
    column = psi.d() + A.wedge(psi) + 3.0 * scalar_identity(2, a).wedge(psi)
    scal = -2.0 * da - psi.dagger().wedge(psi)
    return Su3Curvature(matrix2, column, scal)


def block_residual(data: Su3Data) -> float:
    calF = connection_curvature(data.assemble())
    return residual(calF, curvature_blocks(data).assemble().truncated(calF.depth))


# -- insertion densities ------------------------------------------------------


@dataclass
class InsertionParams:
    """Projector weights (p, q, r, s) and the couplings they induce."""

    p: float
    q: float
    r: float
    s: float

    @classmethod
    def from_c(cls, c: float) -> "InsertionParams":
        """Single diagonal insertion diag(1, 1, c)."""
        return cls(1.0, float(c), 1.0, 1.0)

    @property
    def coeffs(self):
        return coeffs_from_pqrs(self.p, self.q, self.r, self.s)


def coeffs_from_pqrs(p, q, r, s):
    """Couplings (lam, mu, nu) produced by the (p, q, r, s) insertion.

    Always lands on the plane 3 lam - mu + 4 nu = 0, and (1,1,1,1)
    (the plain Pontryagin-type density) gives (0, 0, 0).
    """
    lam = 2.0 * p * r - p * s - q * r
    mu = 2.0 * p * r + 4.0 * q * s - 3.0 * (p * s + q * r)
    nu = 1.0 * q * s - 1.0 * p * r
    return lam, mu, nu


def gamma_matrix(c: float, depth=2) -> MatrixForm:
    return MatrixForm.const(np.diag([1.0, 1.0, float(c)]), depth=depth)


def general_action_density(data: Su3Data, p, q, r, s) -> MatrixForm:
    """Tr((p P + q Q) cal_F (r P + s Q) cal_F), P and Q the block projectors."""
    calF = connection_curvature(data.assemble())
    d = calF.depth
    P3 = MatrixForm.const(np.diag([1.0, 1.0, 0.0]), depth=d)
    Q3 = MatrixForm.const(np.diag([0.0, 0.0, 1.0]), depth=d)
    left = float(p) * P3 + float(q) * Q3
    right = float(r) * P3 + float(s) * Q3
    return left.wedge(calF).wedge(right.wedge(calF)).trace()


def gamma_action_density(data: Su3Data, c: float) -> MatrixForm:
    """Tr(gamma cal_F ^ cal_F) for gamma = diag(1, 1, c)."""
    return general_action_density(data, 1.0, c, 1.0, 1.0)


def general_expansion_residual(data: Su3Data, p, q, r, s) -> float:
    """Pointwise defect of the insertion-density expansion.

    Tr((pP+qQ) calF (rP+sQ) calF) = pr Tr(F F) + (2pr + 4qs) da da
    - (ps + qr) dX + lam psi^dagger F psi + mu da psi^dagger psi
    + nu (psi^dagger psi)^2,  X = (1/2) psi^dagger D psi
    + (1/2) D psi^dagger psi - 3 a psi^dagger psi.

    First two terms are topological, dX is exact, the rest is
    model_lagrangian with coeffs_from_pqrs; zero for analytic fields
    at every (p, q, r, s).
    """
    A, a, psi = data.A, data.a, data.psi
    lam, mu, nu = coeffs_from_pqrs(p, q, r, s)
    FA = su2_field_curvature(A)
    da = a.d()
    pdp = psi.dagger().wedge(psi)
    dpsi_cov = psi.d() + A.wedge(psi)
    dpsid_cov = psi.dagger().d() + psi.dagger().wedge(A)
    X = (0.5 * psi.dagger().wedge(dpsi_cov)
         + 0.5 * dpsid_cov.wedge(psi)
         - 3.0 * a.wedge(pdp))
    rhs = (float(p * r) * FA.wedge(FA).trace()
           + float(2.0 * p * r + 4.0 * q * s) * da.wedge(da)
           - float(p * s + q * r) * X.d()
           + lam * psi.dagger().wedge(FA).wedge(psi)
           + mu * da.wedge(pdp)
           + nu * pdp.wedge(pdp))
    return residual(general_action_density(data, p, q, r, s), rhs)


def expansion_identity_residual(data: Su3Data, c: float) -> float:
    """Single-insertion case of general_expansion_residual."""
    return general_expansion_residual(data, 1.0, c, 1.0, 1.0)


# -- field equations from the connection --------------------------------------


def direct_el_matrix(data: Su3Data, c: float) -> MatrixForm:
    """d_A(gamma calF + calF gamma), the 3x3 Euler-Lagrange 3-form."""
    calA = data.assemble()
    calF = connection_curvature(calA)
    gam = gamma_matrix(c, depth=calF.depth)
    gf = gam.wedge(calF) + calF.wedge(gam)
    return gf.d() + calA.wedge(gf) - gf.wedge(calA)


def el_blocks(data: Su3Data) -> MatrixForm:
    """The c-independent factor of the Euler-Lagrange matrix.

    direct_el_matrix(data, c) == (c - 1) * el_blocks(data):
    [[D(psi psi^dagger), (F - I da - 2 psi psi^dagger) psi],
     [psi^dagger (F - I da - 2 psi psi^dagger), -d(psi^dagger psi)]].
    """
    A, a, psi = data.A, data.a, data.psi
    ppd = psi.wedge(psi.dagger())
    core = (su2_field_curvature(A)
            - scalar_identity(2, a.d())
            - 2.0 * ppd)
    return MatrixForm.from_blocks([
        [covariant_d(A, ppd), core.wedge(psi)],
        [psi.dagger().wedge(core), -1.0 * psi.dagger().wedge(psi).d()],
    ])


def el_identity_residual(data: Su3Data, c: float) -> float:
    lhs = direct_el_matrix(data, c)
    return residual(lhs, (c - 1.0) * el_blocks(data).truncated(lhs.depth))


def model_lagrangian(data: Su3Data, lam: float, mu: float, nu: float) -> MatrixForm:
    """lam psi^dagger F psi + mu da psi^dagger psi + nu (psi^dagger psi)^2."""
    A, a, psi = data.A, data.a, data.psi
    FA = su2_field_curvature(A)
    pdp = psi.dagger().wedge(psi)
    return (lam * psi.dagger().wedge(FA).wedge(psi)
            + mu * a.d().wedge(pdp)
            + nu * pdp.wedge(pdp))


def el_residuals_connection(data: Su3Data, lam: float, mu: float, nu: float):
    """Residuals of the model-lagrangian field equations.

    r_adj : max-norm of D_A(psi psi^dagger)  (A and a variations; the
            trace part carries d(psi^dagger psi)).
    r_psi : max-norm of (lam F + mu I da + 2 nu psi psi^dagger) psi
            (psi^dagger variation).
    """
    A, a, psi = data.A, data.a, data.psi
    ppd = psi.wedge(psi.dagger())
    r_adj = covariant_d(A, ppd).max_abs()
    el_psi = (lam * su2_field_curvature(A)
              + scalar_identity(2, mu * a.d())
              + (2.0 * nu) * ppd).wedge(psi)
    return r_adj, el_psi.max_abs()


# -- canonical data from a unitary coframe ------------------------------------


def canonical_connection(uc: UnitaryCoframe, u2: U2Data) -> Su3Data:
    """Composite connection induced by the Levi-Civita u(2) data.

    A is the su(2) part, a is one third of the abelian part, and the
    soldering column is psi / sqrt(2).  These scales make the standard
    projective-plane chart the flat model of the construction: there
    all three curvature blocks vanish identically, and the
    connection-level field equations hold for every coupling triple on
    the plane 3 lam - mu + 4 nu = 0.
    """
    return Su3Data(u2.su2, (1.0 / 3.0) * u2.u1, (1.0 / SQRT2) * uc.psi)


def geometric_abelian(u2: U2Data) -> MatrixForm:
    """The abelian potential whose i da is the unscaled Kahler form on
    the projective-plane chart.

    Two thirds of the u(1) part of the Levi-Civita connection; twice
    the canonical_connection scale, matching the metric-variable field
    equations rather than the flat-model normalization.
    """
    return (2.0 / 3.0) * u2.u1


class CanonicalAbelian:
    """Point-evaluable field for geometric_abelian over a frame field."""

    def __init__(self, ff: FrameField):
        self.ff = ff

    def at(self, x, depth=2):
        cof = self.ff.coframe_at(x, depth)
        return geometric_abelian(extract_u2(solve_levi_civita(cof)))


def kahler_einstein_check(uc: UnitaryCoframe, a: MatrixForm = None):
    """Flat-model certification residuals for a frame and abelian field.

    Works in the canonical_connection scale (soldering psi / sqrt(2),
    default a one third of the Levi-Civita u(1) part) and returns the
    max-norms of

    res_ida_omega : i da - omega
    res_F_Sigma   : F(su(2) part) - Sigma
    res_T         : the intrinsic torsion

    where omega and Sigma are the structure forms of the scaled
    soldering.  All three vanish exactly on the standard
    Kahler-Einstein projective-plane chart, the flat model of the
    composite connection.
    """
    cof = uc.coframe()
    u2 = extract_u2(solve_levi_civita(cof))
    if a is None:
        a = (1.0 / 3.0) * u2.u1
    psi_c = (1.0 / SQRT2) * uc.psi
    pdp_c = psi_c.dagger().wedge(psi_c)
    omega_c = (-0.5j) * pdp_c
    sigma_c = psi_c.wedge(psi_c.dagger()) + scalar_identity(2, 0.5 * pdp_c)
    F = su2_field_curvature(u2.su2)
    res_ida = (1j * a.d() - omega_c).max_abs()
    res_fs = (F - sigma_c.truncated(F.depth)).max_abs()
    return {
        "res_ida_omega": res_ida,
        "res_F_Sigma": res_fs,
        "res_T": u2.torsion.max_abs(),
    }


# -- metric form of the functional ---------------------------------------------


def metric_lagrangian_density(cof: Coframe, R: MatrixForm, a: MatrixForm,
                              lam: float, mu: float) -> MatrixForm:
    """The model density rewritten in metric variables.

    -lam [ (s_eps + 2 mut - 6) dV - 2 mut omega ^ (i da) ] with
    mut = mu / lam, where s_eps dV is the epsilon-contraction curvature
    4-form (half the Ricci trace in that normalization; see
    eps_contraction_form).  Equals model_lagrangian evaluated on the
    su(2) Levi-Civita part whenever nu = (mu - 3 lam) / 4, i.e. on the
    insertion plane.
    """
    if lam == 0.0:
        raise ValueError("mu-tilde form requires lam != 0")
    mut = mu / lam
    uc = cof.unitary()
    sf = structure_forms(uc)
    s_form = eps_contraction_form(R, cof)
    ida = 1j * a.d()
    return -lam * (s_form + (2.0 * mut - 6.0) * sf.vol
                   - 2.0 * mut * sf.kahler.wedge(ida))


def model_metric_residual(uc: UnitaryCoframe, a: MatrixForm,
                          lam: float, mu: float) -> float:
    """Defect of the connection-density / metric-density identity.

    Builds model_lagrangian with A = su(2) part of the Levi-Civita
    connection and nu = (mu - 3 lam) / 4, and compares with
    metric_lagrangian_density on the same frame.
    """
    cof = uc.coframe()
    w = solve_levi_civita(cof)
    u2 = extract_u2(w)
    R = curvature(w)
    nu = (mu - 3.0 * lam) / 4.0
    data = Su3Data(u2.su2, a, uc.psi)
    lhs = model_lagrangian(data, lam, mu, nu)
    return residual(lhs, metric_lagrangian_density(cof, R, a, lam, mu).truncated(lhs.depth))


def el_residuals_geometric(ff: FrameField, a_field, x, mu_t: float,
                           j_tol: float = 1e-6, grad_step: float = 1e-4):
    """Residuals of the metric-variable field equations at a point.

    Returns a dict with

    r_ric20   : J-anti-invariant part of the Ricci tensor.
    r_da20    : (2,0)+(0,2) part of da.
    r_domega  : d of the fundamental 2-form.
    j_defect  : J-invariance defect of Ric; when above j_tol the Ricci
                form is not of type (1,1) and r_mainfeq is set to None.
    r_mainfeq : rho - (1/2)(s - 6) omega - mu_t (omega - i da),
                frame components, max-norm; s is the Ricci trace.
    grad_s    : finite-difference norm of ds (constant-s reporting).

    All residuals vanish on the standard projective-plane chart with
    the geometric abelian potential for every mu_t, and on the flat
    frame with a = 0 exactly at mu_t = 3 (at other mu_t the main
    residual is |mu_t - 3| times the norm of omega).
    """
    x = np.asarray(x, dtype=float)
    uc = ff.at(x)
    cof = uc.coframe()
    w = solve_levi_civita(cof)
    R = curvature(w)
    rd = ricci_data(R, cof)
    sf = structure_forms(uc)
    a = a_field.at(x)

    _, ric20 = type_split_sym(rd.ric)
    r_ric20 = float(np.max(np.abs(ric20)))

    da = a.d()
    _, da20 = type_split_2form(da, cof)
    r_da20 = da20.max_abs()

    r_domega = sf.kahler.d().max_abs()

    if rd.j_defect <= j_tol:
        omega_f = frame_components_2form(sf.kahler, cof)[:, :, 0, 0]
        ida_f = frame_components_2form(1j * da, cof)[:, :, 0, 0]
        main = (rd.rho_frame
                - 0.5 * (rd.s - 6.0) * omega_f
                - mu_t * (omega_f - ida_f))
        r_mainfeq = float(np.max(np.abs(main)))
    else:
        r_mainfeq = None

    def s_at(y):
        c = ff.coframe_at(y)
        return scalar_curvature(curvature(solve_levi_civita(c)), c)

    grad_s = float(np.linalg.norm(fd_scalar_gradient(s_at, x, step=grad_step)))
    return {
        "r_ric20": r_ric20,
        "r_da20": r_da20,
        "r_domega": r_domega,
        "j_defect": rd.j_defect,
        "r_mainfeq": r_mainfeq,
        "grad_s": grad_s,
    }


# -- gauge transformations ------------------------------------------------------


def constant_gauge_transform(data: Su3Data, U: np.ndarray) -> Su3Data:
    """Action of a constant U(2) element embedded as diag(U, 1/det U).

    A -> U A U^dagger, a -> a, psi -> det(U) U psi.  Insertion densities
    are invariant since the weights commute with the embedding.
    """
    U = np.asarray(U, dtype=complex)
    det = complex(np.linalg.det(U))
    Uf = MatrixForm.const(U, depth=data.A.depth)
    Ud = MatrixForm.const(U.conj().T, depth=data.A.depth)
    return Su3Data(
        Uf.wedge(data.A).wedge(Ud),
        data.a,
        det * Uf.wedge(data.psi),
    )
