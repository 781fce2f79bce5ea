"""Periodic-lattice discretization of the metric functional and descent flows.

The state is the real coframe table and abelian potential on an N^4
grid of spacing h = 2*pi/N.  All derivatives are second-order central
differences over periodic rolls; the connection solve is the same
24x24 structure system as the exact-jet path, batched over sites, so
the discrete action inherits its gradient from algorithmic
differentiation of exactly the computation that defines it.  Second
derivatives of the coframe enter only through differences of the
solved connection (composed +-2h stencils), keeping every stage a
plain tensor operation.

The density is the mu-tilde form of the model Lagrangian with the
epsilon-normalized curvature scalar (half the Ricci trace; see
geometry.eps_contraction_form):

    -lam [ (s/2 + 2 mut - 6) det(E) - 2 mut (omega ^ i da)_0123 ]

Topological terms are absent by construction.  The torus keeps the
integration-by-parts exact: sums of rolled differences telescope to
zero, which is what makes the flat state an exact discrete critical
point at mu-tilde = 3.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import torch

from .frames import (
    AbelianField,
    DegenerateFrameError,
    FlatFrame,
    FrameField,
    PerturbedFrame,
)
from .geometry import J0, PAIRS
from .jets import DIM

DET_TOL = 1e-6
STATE_FORMAT = "akgeo-lattice-state"
STATE_VERSION = 1

TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
_PAIR_INDEX = {p: k for k, p in enumerate(PAIRS)}


def configure_threads(default=None):
    """Set torch's thread count from the AKGEO_THREADS environment variable."""
    raw = os.environ.get("AKGEO_THREADS", "")
    if raw.strip():
        torch.set_num_threads(max(1, int(raw)))
    elif default is not None:
        torch.set_num_threads(max(1, int(default)))
    return torch.get_num_threads()


def _sign_pair(i, j):
    return (1.0, _PAIR_INDEX[(i, j)]) if i < j else (-1.0, _PAIR_INDEX[(j, i)])


def _trig_grid(poly, n):
    """Values of a TrigPoly on the n^4 grid, vectorized over sites."""
    xs = 2.0 * math.pi * np.arange(n) / n
    grids = np.meshgrid(xs, xs, xs, xs, indexing="ij")
    out = np.full((n, n, n, n), float(np.real(poly.const)))
    for ac, bs, kv in poly.waves:
        theta = sum(k * g for k, g in zip(kv, grids))
        out += np.real(ac) * np.cos(theta) + np.real(bs) * np.sin(theta)
    return out


def _build_assembly_tables():
    """Constant tensors turning the coframe into the structure system.

    M[r, k] = sum_{J, rho} AM[r, k, J, rho] E[J, rho]
    b[r]    = sum_{I, mu, sigma} AB[r, I, mu, sigma] dE[I, mu, sigma]
    w[sigma, I, J] = sum_k EX[k, sigma, I, J] w_flat[k]
    """
    npairs = len(PAIRS)
    am = np.zeros((DIM * npairs, 4 * npairs, DIM, DIM))
    ab = np.zeros((DIM * npairs, DIM, DIM, DIM))
    ex = np.zeros((4 * npairs, DIM, DIM, DIM))
    for I in range(DIM):
        for k2, (mu, nu) in enumerate(PAIRS):
            r = I * npairs + k2
            ab[r, I, nu, mu] = -1.0
            ab[r, I, mu, nu] = 1.0
            for J in range(DIM):
                if J == I:
                    continue
                s, pk = _sign_pair(I, J)
                am[r, pk * DIM + mu, J, nu] += s
                am[r, pk * DIM + nu, J, mu] -= s
    for pk, (I, J) in enumerate(PAIRS):
        for mu in range(DIM):
            ex[pk * DIM + mu, mu, I, J] = 1.0
            ex[pk * DIM + mu, mu, J, I] = -1.0
    to = lambda a: torch.tensor(a, dtype=torch.float64)
    return to(am), to(ab), to(ex)


_ASSEM_M, _ASSEM_B, _EXPAND_W = _build_assembly_tables()
_J0 = torch.tensor(J0, dtype=torch.float64)


# -- state ---------------------------------------------------------------------


@dataclass
class LatticeState:
    """Coframe and abelian potential on the periodic grid.

    e[i0,i1,i2,i3, I, mu] are the real components E^I_mu (16 reals per
    site, the components of alpha and beta over dx^mu); a[..., mu] are
    the real coefficients of the imaginary 1-form i a_mu dx^mu.
    """

    e: torch.Tensor
    a: torch.Tensor

    def __post_init__(self):
        self.e = torch.as_tensor(self.e, dtype=torch.float64)
        self.a = torch.as_tensor(self.a, dtype=torch.float64)
        n = self.e.shape[0]
        if self.e.shape != (n, n, n, n, DIM, DIM):
            raise ValueError(f"coframe table shape {tuple(self.e.shape)} is not (n,n,n,n,4,4)")
        if self.a.shape != (n, n, n, n, DIM):
            raise ValueError(f"potential table shape {tuple(self.a.shape)} is not (n,n,n,n,4)")

    @property
    def n(self):
        return self.e.shape[0]

    @property
    def h(self):
        return 2.0 * math.pi / self.n

    @classmethod
    def flat(cls, n):
        e = torch.zeros((n, n, n, n, DIM, DIM), dtype=torch.float64)
        e[..., range(DIM), range(DIM)] = 1.0
        return cls(e, torch.zeros((n, n, n, n, DIM), dtype=torch.float64))

    @classmethod
    def from_frame_field(cls, ff: FrameField, n, a_field=None):
        """Sample a periodic frame field (and optional abelian field) on the grid."""
        if not getattr(ff, "periodic", False):
            raise ValueError(
                f"{type(ff).__name__} is not periodic on the 2*pi torus; "
                "lattice states need toral chart data"
            )
        h = 2.0 * math.pi / n
        a = np.zeros((n, n, n, n, DIM))
        if a_field is not None:
            for mu in range(DIM):
                a[..., mu] = _trig_grid(a_field.components[mu], n)
        if isinstance(ff, FlatFrame):
            e = np.zeros((n, n, n, n, DIM, DIM))
            e[..., range(DIM), range(DIM)] = 1.0
        elif isinstance(ff, PerturbedFrame):
            e = np.zeros((n, n, n, n, DIM, DIM))
            for I in range(DIM):
                for mu in range(DIM):
                    e[..., I, mu] = _trig_grid(ff.entries[I][mu], n)
                    if I == mu:
                        e[..., I, mu] += 1.0
        else:
            e = np.zeros((n, n, n, n, DIM, DIM))
            for idx in np.ndindex(n, n, n, n):
                e[idx] = ff.coframe_at(h * np.asarray(idx, dtype=float), 0).values()
        return cls(torch.tensor(e), torch.tensor(a))

    @classmethod
    def perturbed(cls, n, seed, amplitude=1e-2):
        """Flat state plus seeded trig-polynomial perturbations of e and a."""
        return cls.from_frame_field(
            PerturbedFrame.seeded(seed, amplitude=amplitude),
            n,
            a_field=AbelianField.seeded(seed + 1, amplitude=amplitude),
        )

    def gauge_rotate(self, U):
        """Constant U(2) rotation of (alpha, beta) = (e0 + i e1, e2 + i e3)."""
        U = np.asarray(U, dtype=complex)
        alpha = self.e[..., 0, :] + 1j * self.e[..., 1, :]
        beta = self.e[..., 2, :] + 1j * self.e[..., 3, :]
        alpha, beta = (
            U[0, 0] * alpha + U[0, 1] * beta,
            U[1, 0] * alpha + U[1, 1] * beta,
        )
        e = torch.stack([alpha.real, alpha.imag, beta.real, beta.imag], dim=-2)
        return LatticeState(e, self.a.clone())

    def translate(self, shifts):
        sh = [int(s) for s in shifts]
        return LatticeState(
            torch.roll(self.e, sh, dims=(0, 1, 2, 3)),
            torch.roll(self.a, sh, dims=(0, 1, 2, 3)),
        )

    def save(self, path):
        payload = {
            "format": STATE_FORMAT,
            "version": STATE_VERSION,
            "n": self.n,
            "e": self.e.reshape(-1).tolist(),
            "a": self.a.reshape(-1).tolist(),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("format") != STATE_FORMAT:
            raise ValueError(f"not a lattice state file: {path}")
        if payload.get("version") != STATE_VERSION:
            raise ValueError(f"unsupported state version {payload.get('version')}")
        n = payload["n"]
        e = torch.tensor(payload["e"], dtype=torch.float64).reshape(n, n, n, n, DIM, DIM)
        a = torch.tensor(payload["a"], dtype=torch.float64).reshape(n, n, n, n, DIM)
        return cls(e, a)


@dataclass
class FlowConfig:
    mu_tilde: float
    lambda_overall: float = 1.0
    step: float = 0.01
    max_iters: int = 200
    grad_tol: float = 1e-8
    backtrack: float = 0.5
    armijo: float = 1e-4

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtracking factor must sit in (0, 1)")


@dataclass
class FlowLog:
    """Per-iteration record of a descent run; JSON-lines and CSV emission."""

    rows: list = field(default_factory=list)
    reason: str = ""
    final_residuals: dict = field(default_factory=dict)

    FIELDS = ("iter", "action", "grad_norm", "r_ric20", "r_da20",
              "r_domega", "r_mainfeq", "step")

    def append(self, **kw):
        self.rows.append({k: kw.get(k) for k in self.FIELDS})

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for row in self.rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
            fh.write(json.dumps(
                {"reason": self.reason, "final_residuals": self.final_residuals},
                sort_keys=True) + "\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self.FIELDS)
            writer.writeheader()
            writer.writerows(self.rows)


# -- differential pipeline -------------------------------------------------------


def _diff(f, axis, h):
    return (torch.roll(f, -1, dims=axis) - torch.roll(f, 1, dims=axis)) / (2.0 * h)


def _grad_field(f, h):
    """Central-difference gradient over the four lattice axes (last index)."""
    return torch.stack([_diff(f, mu, h) for mu in range(DIM)], dim=-1)


def spin_connection(e, h):
    """Torsion-free metric connection per site: w[..., sigma, I, J]."""
    de = _grad_field(e, h)  # [..., I, mu, sigma]
    M = torch.einsum("rkJp,...Jp->...rk", _ASSEM_M, e)
    b = torch.einsum("rIms,...Ims->...r", _ASSEM_B, de)
    w_flat = torch.linalg.solve(M, b.unsqueeze(-1)).squeeze(-1)
    return torch.einsum("...k,ksIJ->...sIJ", w_flat, _EXPAND_W)


def curvature_field(w, h):
    """R[..., mu, nu, I, J] = d_mu w_nu - d_nu w_mu + [w_mu, w_nu]."""
    dw = _grad_field(w, h)  # [..., sigma, I, J, mu] = d_mu w_sigma
    dw = dw.permute(0, 1, 2, 3, 7, 4, 5, 6)  # [..., mu, sigma, I, J]
    ww = torch.einsum("...mIK,...nKJ->...mnIJ", w, w)
    R = dw + ww
    return R - R.transpose(4, 5)


def geometry_fields(st: LatticeState):
    """Connection, curvature, inverse frame, Ricci tensor and scalar."""
    w = spin_connection(st.e, st.h)
    R = curvature_field(w, st.h)
    einv = torch.linalg.inv(st.e)  # [..., mu, I]
    ric = torch.einsum("...mnIJ,...mK,...nJ->...IK", R, einv, einv)
    s = torch.einsum("...II->...", ric)
    return w, R, einv, ric, s


def kahler_field(e):
    """Coordinate components of omega = e0^e1 + e2^e3: [..., mu, nu]."""
    om = (
        torch.einsum("...m,...n->...mn", e[..., 0, :], e[..., 1, :])
        + torch.einsum("...m,...n->...mn", e[..., 2, :], e[..., 3, :])
    )
    return om - om.transpose(-1, -2)


def chi_field(a, h):
    """Coordinate components of i da for a = i a_mu dx^mu (real output)."""
    da = _grad_field(a, h)  # [..., nu, mu] = d_mu a_nu
    return da - da.transpose(-1, -2)  # chi_munu = -(d_mu a_nu - d_nu a_mu)


def _top_wedge(F, G):
    """(F ^ G)_{0123} for antisymmetric coordinate component tables."""
    return (
        F[..., 0, 1] * G[..., 2, 3]
        - F[..., 0, 2] * G[..., 1, 3]
        + F[..., 0, 3] * G[..., 1, 2]
        + F[..., 1, 2] * G[..., 0, 3]
        - F[..., 1, 3] * G[..., 0, 2]
        + F[..., 2, 3] * G[..., 0, 1]
    )


def _check_nondegenerate(st: LatticeState):
    dets = torch.linalg.det(st.e)
    worst = torch.argmin(torch.abs(dets))
    if float(torch.abs(dets).reshape(-1)[worst]) < DET_TOL:
        site = np.unravel_index(int(worst), dets.shape)
        raise DegenerateFrameError(f"degenerate coframe at site {tuple(int(i) for i in site)}")
    return dets


def action_from_tensors(e, a, n, cfg: FlowConfig):
    h = 2.0 * math.pi / n
    w = spin_connection(e, h)
    R = curvature_field(w, h)
    einv = torch.linalg.inv(e)
    s = torch.einsum("...mnIJ,...mI,...nJ->...", R, einv, einv)
    dets = torch.linalg.det(e)
    density = -cfg.lambda_overall * (
        (0.5 * s + 2.0 * cfg.mu_tilde - 6.0) * dets
        - 2.0 * cfg.mu_tilde * _top_wedge(kahler_field(e), chi_field(a, h))
    )
    return (h ** DIM) * density.sum()


def lattice_action(st: LatticeState, cfg: FlowConfig) -> float:
    """Discrete action; raises naming the site if a coframe degenerates."""
    _check_nondegenerate(st)
    return float(action_from_tensors(st.e, st.a, st.n, cfg))


def lattice_gradient(st: LatticeState, cfg: FlowConfig):
    """Exact gradient of the discrete action over (e, a), by autograd."""
    _check_nondegenerate(st)
    e = st.e.clone().requires_grad_(True)
    a = st.a.clone().requires_grad_(True)
    act = action_from_tensors(e, a, st.n, cfg)
    ge, ga = torch.autograd.grad(act, (e, a))
    return ge, ga


def gradient_norm(ge, ga) -> float:
    return float(torch.sqrt((ge ** 2).sum() + (ga ** 2).sum()))


# -- residuals -------------------------------------------------------------------


def _l2(x, h):
    return float(torch.sqrt((h ** DIM) * (x ** 2).sum()))


def lattice_residuals(st: LatticeState, mu_tilde: float, j_tol: float = 1e-6):
    """L2 norms of the four geometric field-equation defects.

    r_mainfeq uses the Ricci-trace scalar, matching the pointwise
    el_residuals_geometric convention.  When the Ricci tensor fails
    J-invariance beyond j_tol the Ricci form is not honestly (1,1) and
    the main residual is flagged conditional (still reported).
    """
    h = st.h
    _, _, einv, ric, s = geometry_fields(st)

    ricJJ = torch.einsum("AI,BK,...AB->...IK", _J0, _J0, ric)
    ric20 = 0.5 * (ric - ricJJ)
    j_defect = float(torch.abs(ric - ricJJ).max())

    chi = chi_field(st.a, h)
    chi_f = torch.einsum("...mI,...nJ,...mn->...IJ", einv, einv, chi)
    chiJJ = torch.einsum("AI,BK,...AB->...IK", _J0, _J0, chi_f)
    da20 = 0.5 * (chi_f - chiJJ)

    om = kahler_field(st.e)
    dom = _grad_field(om, h)  # [..., mu, nu, sigma] = d_sigma om_munu
    domega = torch.stack(
        [
            dom[..., n_, r_, m_] - dom[..., m_, r_, n_] + dom[..., m_, n_, r_]
            for (m_, n_, r_) in TRIPLES
        ],
        dim=-1,
    )

    rho_raw = torch.einsum("...IK,KJ->...IJ", ric, _J0)
    rho = 0.5 * (rho_raw - rho_raw.transpose(-1, -2))
    main = (
        rho
        - 0.5 * (s - 6.0)[..., None, None] * _J0
        - mu_tilde * (_J0 - chi_f)
    )

    return {
        "r_ric20": _l2(ric20, h),
        "r_da20": _l2(da20, h),
        "r_domega": _l2(domega, h),
        "r_mainfeq": _l2(main, h),
        "j_defect": j_defect,
        "mainfeq_conditional": bool(j_defect > j_tol),
    }


# -- descent ---------------------------------------------------------------------


def descend(st: LatticeState, cfg: FlowConfig):
    """Gradient descent with Armijo backtracking; returns (state, FlowLog)."""
    log = FlowLog()
    e, a = st.e.clone(), st.a.clone()
    state = LatticeState(e, a)
    action = lattice_action(state, cfg)
    for it in range(cfg.max_iters):
        ge, ga = lattice_gradient(state, cfg)
        gnorm = gradient_norm(ge, ga)
        res = lattice_residuals(state, cfg.mu_tilde)
        row = dict(iter=it, action=action, grad_norm=gnorm,
                   r_ric20=res["r_ric20"], r_da20=res["r_da20"],
                   r_domega=res["r_domega"], r_mainfeq=res["r_mainfeq"])
        if gnorm <= cfg.grad_tol:
            log.append(step=0.0, **row)
            log.reason = "grad_tol"
            break
        step = cfg.step
        gsq = gnorm ** 2
        while True:
            trial = LatticeState(e - step * ge, a - step * ga)
            try:
                new_action = lattice_action(trial, cfg)
            except DegenerateFrameError:
                new_action = math.inf
            if new_action <= action - cfg.armijo * step * gsq:
                break
            step *= cfg.backtrack
            if step < 1e-18:
                break
        if step < 1e-18:
            log.append(step=0.0, **row)
            log.reason = "line_search_underflow"
            break
        e, a = trial.e, trial.a
        state, action = trial, new_action
        log.append(step=step, **row)
    else:
        log.reason = "max_iters"
    log.final_residuals = lattice_residuals(state, cfg.mu_tilde)
    log.final_residuals["action"] = lattice_action(state, cfg)
    log.final_residuals["grad_norm"] = gradient_norm(*lattice_gradient(state, cfg))
    return state, log
