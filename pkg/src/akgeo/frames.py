"""Coframes and analytic test fields on four-dimensional charts.

A unitary coframe packages two complex 1-forms (alpha, beta) whose real
and imaginary parts form an oriented orthonormal coframe; the metric,
almost-complex structure and volume form are all read off from it.  The
adapted index convention is

    alpha = e^0 + i e^1,    beta = e^2 + i e^3,

so the fundamental 2-form is e^01 + e^23 in frame indices.

The catalog provides:

* ``FlatFrame``          constant coframe dx^I,
* ``PerturbedFrame``     flat plus trigonometric-polynomial perturbations
                         (seeded random or the fixed ``t4`` instance),
* ``SphereCylinderFrame`` round 2-sphere times flat plane,
* ``HermitianMetricFrame`` coframe from a Hermitian metric in complex
                         coordinates via Cholesky, covering the
                         Fubini-Study chart and generic Kahler
                         potentials.

All coefficient functions are trig/rational/sqrt compositions evaluated
in jet arithmetic, so frames carry exact depth-2 jets at every point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .forms import MatrixForm
from .jets import DIM, Jet


class DegenerateFrameError(ValueError):
    """Raised when a coframe fails the invertibility threshold."""


DET_TOL = 1e-8


@dataclass(frozen=True)
class Coframe:
    """Orthonormal coframe at a point: a real 4x1 matrix of 1-forms."""

    e: MatrixForm

    def __post_init__(self):
        if (self.e.rows, self.e.cols, self.e.grade) != (4, 1, 1):
            raise ValueError("coframe must be a 4x1 matrix of 1-forms")
        if self.e.max_abs_imag() > 1e-12:
            raise ValueError("coframe coefficients must be real")
        det = self.det()
        if abs(det) < DET_TOL:
            raise DegenerateFrameError(f"coframe determinant {det:.3e} below threshold")

    def values(self):
        """Coefficient matrix E with E[I, mu] the dx^mu component of e^I."""
        return np.ascontiguousarray(self.e.v[:, :, 0].T.real)

    def det(self):
        return float(np.linalg.det(self.values()))

    def entryform(self, i):
        return self.e.entry(i, 0)

    def unitary(self):
        """Adapted unitary coframe (alpha, beta) = (e0 + i e1, e2 + i e3)."""
        ev, eg, eh = self.e.v, self.e.g, self.e.h
        v = ev[:, [0, 2], :] + 1j * ev[:, [1, 3], :]
        g = None if eg is None else eg[:, [0, 2]] + 1j * eg[:, [1, 3]]
        h = None if eh is None else eh[:, [0, 2]] + 1j * eh[:, [1, 3]]
        return UnitaryCoframe(MatrixForm(2, 1, 1, v, g, h))


@dataclass(frozen=True)
class UnitaryCoframe:
    """Unitary coframe at a point: complex 2x1 matrix of 1-forms (alpha, beta)."""

    psi: MatrixForm

    def __post_init__(self):
        if (self.psi.rows, self.psi.cols, self.psi.grade) != (2, 1, 1):
            raise ValueError("unitary coframe must be a 2x1 matrix of 1-forms")

    def coframe(self):
        pv, pg, ph = self.psi.v, self.psi.g, self.psi.h
        v = np.stack(
            [pv[:, 0, 0].real, pv[:, 0, 0].imag, pv[:, 1, 0].real, pv[:, 1, 0].imag],
            axis=1,
        )[:, :, None].astype(complex)
        expand = lambda a: None if a is None else np.stack(
            [a[:, 0, 0].real, a[:, 0, 0].imag, a[:, 1, 0].real, a[:, 1, 0].imag],
            axis=1,
        )[:, :, None].astype(complex)
        g = None if pg is None else expand(pg)
        h = None if ph is None else expand(ph)
        return Coframe(MatrixForm(4, 1, 1, v, g, h))

    @property
    def alpha(self):
        return self.psi.entry(0, 0)

    @property
    def beta(self):
        return self.psi.entry(1, 0)


# -- analytic scalar fields ---------------------------------------------------


@dataclass(frozen=True)
class TrigPoly:
    """Trigonometric polynomial c0 + sum_k [a_k cos(k.x) + b_k sin(k.x)].

    Wavevectors are integer, so the field is 2*pi-periodic in every
    coordinate; jets of any depth are exact.
    """

    const: complex
    waves: tuple  # of (amp_cos, amp_sin, kvec tuple)

    def at(self, x, depth=2):
        acc = Jet.const(self.const, depth)
        for ac, bs, kv in self.waves:
            theta = Jet.linear(np.asarray(kv, dtype=float), x, depth=depth)
            acc = acc + ac * jets.cos(theta) + bs * jets.sin(theta)
        return acc

    @classmethod
    def random(cls, rng, amplitude, kmax=2, nwaves=2, const=0.0):
        waves = []
        scale = amplitude / nwaves
        for _ in range(nwaves):
            kv = tuple(int(k) for k in rng.integers(-kmax, kmax + 1, size=DIM))
            ac = scale * rng.uniform(-1, 1)
            bs = scale * rng.uniform(-1, 1)
            waves.append((ac, bs, kv))
        return cls(const, tuple(waves))


# -- frame fields -------------------------------------------------------------


class FrameField:
    """A chart-wide assignment of unitary coframes, evaluable at points.

    ``periodic`` marks fields that wrap smoothly and nondegenerately on
    the 2*pi torus; only those may seed lattice states.
    """

    periodic = False

    def at(self, x, depth=2) -> UnitaryCoframe:
        raise NotImplementedError

    def coframe_at(self, x, depth=2) -> Coframe:
        return self.at(x, depth).coframe()


class FlatFrame(FrameField):
    periodic = True

    def at(self, x, depth=2):
        v = np.zeros((DIM, 2, 1), dtype=complex)
        v[0, 0, 0] = 1.0
        v[1, 0, 0] = 1j
        v[2, 1, 0] = 1.0
        v[3, 1, 0] = 1j
        g = np.zeros((DIM, 2, 1, DIM), dtype=complex) if depth >= 1 else None
        h = np.zeros((DIM, 2, 1, DIM, DIM), dtype=complex) if depth == 2 else None
        return UnitaryCoframe(MatrixForm(2, 1, 1, v, g, h))


class PerturbedFrame(FrameField):
    """Flat coframe plus periodic trig-polynomial perturbations of E[I, mu]."""

    periodic = True

    def __init__(self, entries):
        # entries[I][mu] is a TrigPoly added to the flat delta_{I mu}
        self.entries = entries

    @classmethod
    def seeded(cls, seed, amplitude=0.1, kmax=2):
        rng = np.random.default_rng(seed)
        entries = [
            [TrigPoly.random(rng, amplitude, kmax) for _ in range(DIM)]
            for _ in range(DIM)
        ]
        return cls(entries)

    @classmethod
    def t4(cls):
        """Fixed deterministic periodic frame used by the CLI catalog."""
        mk = lambda *waves: TrigPoly(0.0, tuple(waves))
        zero = TrigPoly(0.0, ())
        entries = [[zero] * DIM for _ in range(DIM)]
        entries[0][0] = mk((0.08, 0.0, (0, 1, 0, 0)))
        entries[0][1] = mk((0.0, 0.05, (1, 0, 1, 0)))
        entries[1][1] = mk((0.06, 0.0, (0, 0, 1, 1)))
        entries[1][2] = mk((0.0, 0.04, (2, 0, 0, 0)))
        entries[2][2] = mk((0.07, 0.0, (0, 1, 0, 1)))
        entries[2][3] = mk((0.0, 0.05, (0, 0, 0, 2)))
        entries[3][3] = mk((0.05, 0.0, (1, 1, 0, 0)))
        entries[3][0] = mk((0.0, 0.04, (0, 0, 2, 0)))
        return cls(entries)

    def at(self, x, depth=2):
        table = []
        for mu in range(DIM):
            row = []
            for i in range(DIM):
                jet = self.entries[i][mu].at(x, depth)
                if i == mu:
                    jet = jet + 1.0
                row.append([jet])
            table.append(row)
        e = MatrixForm.from_jets(DIM, 1, 1, table)
        return Coframe(e).unitary()


class SphereCylinderFrame(FrameField):
    """Round unit 2-sphere times flat plane: e = (d theta, sin theta d phi, dx2, dx3).

    Chart coordinates (theta, phi, x2, x3) with theta away from the poles.
    """

    def at(self, x, depth=2):
        theta = Jet.coordinate(0, x, depth)
        zero = Jet.const(0.0, depth)
        one = Jet.const(1.0, depth)
        sin_t = jets.sin(theta)
        table = [
            [[one], [zero], [zero], [zero]],      # dx^0 components of e^0..e^3
            [[zero], [sin_t], [zero], [zero]],    # dx^1
            [[zero], [zero], [one], [zero]],      # dx^2
            [[zero], [zero], [zero], [one]],      # dx^3
        ]
        e = MatrixForm.from_jets(DIM, 1, 1, table)
        return Coframe(e).unitary()


class HermitianMetricFrame(FrameField):
    """Unitary coframe from a Hermitian metric H(z) in complex coordinates.

    With z1 = x0 + i x1, z2 = x2 + i x3 and a positive Hermitian 2x2
    matrix function H, the coframe is Psi = P (dz1, dz2)^T with P upper
    triangular and P^dagger P = 2 conj(H).  The conjugate is forced by
    the index order in the induced metric: sum_a alpha_a (sym) conj(alpha_a)
    carries coefficient conj(P^dagger P)_{kl} on dz_k (sym) dzbar_l, and
    that coefficient must equal 2 H_{kl}.  The factor of two matches the
    convention g = 2 H_{kl} dz_k (sym) dzbar_l (Euclidean space is
    H = I/2); both choices are pinned by the Fubini-Study chart coming
    out Einstein with scalar curvature 12.
    """

    def __init__(self, h_fn):
        self.h_fn = h_fn  # x, depth -> ((H11, H12), (H21, H22)) jets

    def at(self, x, depth=2):
        (h11, h12), (h21, h22) = self.h_fn(x, depth)
        # Cholesky of M = 2 conj(H): M = L L^dagger, L lower; P = L^dagger.
        m11 = 2.0 * h11.conjugate()
        m21 = 2.0 * h21.conjugate()
        m22 = 2.0 * h22.conjugate()
        l11 = jets.sqrt(m11.real)
        l21 = m21 / l11
        l22 = jets.sqrt((m22 - l21 * l21.conjugate()).real)
        p11, p12, p22 = l11, l21.conjugate(), l22
        dz1 = (Jet.const(1.0, depth), Jet.const(1j, depth), Jet.const(0.0, depth), Jet.const(0.0, depth))
        dz2 = (Jet.const(0.0, depth), Jet.const(0.0, depth), Jet.const(1.0, depth), Jet.const(1j, depth))
        zero = Jet.const(0.0, depth)
        table = []
        for mu in range(DIM):
            alpha_mu = p11 * dz1[mu] + p12 * dz2[mu]
            beta_mu = p22 * dz2[mu]
            table.append([[alpha_mu], [beta_mu]])
        return UnitaryCoframe(MatrixForm.from_jets(2, 1, 1, table))

    @classmethod
    def fubini_study(cls):
        """Chart of the complex projective plane, potential log(1 + |z|^2)."""

        def h_fn(x, depth):
            X = [Jet.coordinate(mu, x, depth) for mu in range(DIM)]
            z1 = X[0] + 1j * X[1]
            z2 = X[2] + 1j * X[3]
            z1b, z2b = z1.conjugate(), z2.conjugate()
            u = 1.0 + z1 * z1b + z2 * z2b
            inv_u2 = 1.0 / (u * u)
            h11 = (u - z1b * z1) * inv_u2
            h12 = (-z1b * z2) * inv_u2
            h21 = (-z2b * z1) * inv_u2
            h22 = (u - z2b * z2) * inv_u2
            return (h11, h12), (h21, h22)

        return cls(h_fn)

    @classmethod
    def polynomial_kahler(cls, eps=0.1):
        """Generic Kahler chart: potential (|z1|^2 + |z2|^2)/2 + eps |z1 z2|^2.

        Non-Einstein, non-flat for eps != 0; stays positive definite for
        moderate |z| and eps.  Useful as a Kahler-but-generic test case.
        """

        def h_fn(x, depth):
            X = [Jet.coordinate(mu, x, depth) for mu in range(DIM)]
            z1 = X[0] + 1j * X[1]
            z2 = X[2] + 1j * X[3]
            z1b, z2b = z1.conjugate(), z2.conjugate()
            h11 = 0.5 + eps * (z2 * z2b)
            h22 = 0.5 + eps * (z1 * z1b)
            h12 = eps * z1b * z2
            h21 = eps * z2b * z1
            return (h11, h12), (h21, h22)

        return cls(h_fn)


# -- gauge-field test data ----------------------------------------------------


class AbelianField:
    """Imaginary-valued 1-form field a = i sum_mu f_mu(x) dx^mu, f_mu real."""

    def __init__(self, components):
        self.components = components  # four TrigPoly

    @classmethod
    def seeded(cls, seed, amplitude=0.3, kmax=2):
        rng = np.random.default_rng(seed)
        return cls(tuple(TrigPoly.random(rng, amplitude, kmax) for _ in range(DIM)))

    @classmethod
    def zero(cls):
        return cls(tuple(TrigPoly(0.0, ()) for _ in range(DIM)))

    def at(self, x, depth=2):
        table = [[[1j * self.components[mu].at(x, depth)]] for mu in range(DIM)]
        return MatrixForm.from_jets(1, 1, 1, table)


class Su2Field:
    """su(2)-valued 1-form: A_mu = [[i u, v + i w], [-v + i w, -i u]]_mu."""

    def __init__(self, u, v, w):
        self.u, self.v, self.w = u, v, w  # each: four TrigPoly

    @classmethod
    def seeded(cls, seed, amplitude=0.3, kmax=2):
        rng = np.random.default_rng(seed)
        comp = lambda: tuple(TrigPoly.random(rng, amplitude, kmax) for _ in range(DIM))
        return cls(comp(), comp(), comp())

    @classmethod
    def zero(cls):
        z = tuple(TrigPoly(0.0, ()) for _ in range(DIM))
        return cls(z, z, z)

    def at(self, x, depth=2):
        table = []
        for mu in range(DIM):
            u = self.u[mu].at(x, depth)
            v = self.v[mu].at(x, depth)
            w = self.w[mu].at(x, depth)
            iu = 1j * u
            table.append([[iu, v + 1j * w], [-1.0 * v + 1j * w, -1j * u]])
        return MatrixForm.from_jets(2, 2, 1, table)


class ColumnField:
    """Complex 2x1 1-form field, used for coframe variations."""

    def __init__(self, comps):
        self.comps = comps  # comps[row][mu] = (re TrigPoly, im TrigPoly)

    @classmethod
    def seeded(cls, seed, amplitude=1.0, kmax=2):
        rng = np.random.default_rng(seed)
        comps = [
            [
                (TrigPoly.random(rng, amplitude, kmax), TrigPoly.random(rng, amplitude, kmax))
                for _ in range(DIM)
            ]
            for _ in range(2)
        ]
        return cls(comps)

    def at(self, x, depth=2):
        table = []
        for mu in range(DIM):
            rows = []
            for r in range(2):
                re, im = self.comps[r][mu]
                rows.append([re.at(x, depth) + 1j * im.at(x, depth)])
            table.append(rows)
        return MatrixForm.from_jets(2, 1, 1, table)


# -- catalog -----------------------------------------------------------------

MANIFOLDS = ("flat", "t4", "s2xr2", "cp2", "random")


def frame_field(name, seed=0):
    if name == "flat":
        return FlatFrame()
    if name == "t4":
        return PerturbedFrame.t4()
    if name == "s2xr2":
        return SphereCylinderFrame()
    if name == "cp2":
        return HermitianMetricFrame.fubini_study()
    if name == "random":
        return PerturbedFrame.seeded(seed)
    raise ValueError(f"unknown manifold {name!r}; choose from {MANIFOLDS}")


def sample_points(name, n, seed=0):
    """Seeded sample points inside the safe chart domain of a manifold."""
    rng = np.random.default_rng(seed + 0xA4)
    if name in ("flat", "t4", "random"):
        return rng.uniform(0.0, 2 * np.pi, size=(n, DIM))
    if name == "s2xr2":
        pts = rng.uniform(0.0, 2 * np.pi, size=(n, DIM))
        pts[:, 0] = rng.uniform(0.4, np.pi - 0.4, size=n)  # away from the poles
        return pts
    if name == "cp2":
        return rng.uniform(-1.0, 1.0, size=(n, DIM))  # stays inside |z| <= 2
    raise ValueError(f"unknown manifold {name!r}; choose from {MANIFOLDS}")
