"""Matrix-valued differential forms over a four-dimensional chart.

A :class:`MatrixForm` is an m x n matrix whose entries are complex
differential forms of one common grade, represented by coefficients over
the ordered increasing multi-index basis of that grade (1, 4, 6, 4, 1
basis elements for grades 0..4; grades above four are identically zero
and carry an empty basis).  Coefficients are second-order jets, stored
structure-of-arrays style: a value block plus optional gradient and
Hessian blocks, so wedge products and exterior derivatives reduce to a
few dense einsums against precomputed sign tables.

Conventions baked in here and relied on by everything downstream:

* wedge of basis covectors follows the permutation sign of merging the
  two increasing multi-indices; repeated indices give zero,
* ``d`` acts as d(f dx^I) = sum_mu (d_mu f) dx^mu ^ dx^I and lowers the
  tracked jet depth by one,
* ``dagger`` is the conjugate transpose of the matrix with NO extra
  grade-dependent sign on the form coefficients.  With this convention
  (d Psi + A ^ Psi)^dagger = d Psi^dagger + Psi^dagger ^ A for a column
  of 1-forms and anti-Hermitian 1-form matrix A, which is the identity
  the curvature block algebra depends on.
"""

from __future__ import annotations

import itertools
import numbers

import numpy as np

from .jets import DIM, Jet, JetDepthError


class ShapeMismatchError(ValueError):
    """Raised when matrix dimensions or form grades are incompatible."""


def _basis(grade):
    if grade < 0:
        raise ValueError(f"negative form grade {grade}")
    if grade > DIM:
        return ()
    return tuple(itertools.combinations(range(DIM), grade))


BASES = {p: _basis(p) for p in range(0, 10)}
_INDEX = {p: {m: i for i, m in enumerate(b)} for p, b in BASES.items()}


def _merge_sign(a, b):
    """Sign of sorting the concatenation of two increasing multi-indices.

    Returns (multi_index, sign) or None when an index repeats.
    """
    if set(a) & set(b):
        return None
    merged = a + b
    # parity of the permutation that sorts `merged`
    sign = 1
    for i in range(len(merged)):
        for j in range(i + 1, len(merged)):
            if merged[i] > merged[j]:
                sign = -sign
    return tuple(sorted(merged)), sign


def _wedge_table(p, q):
    table = []
    for i, a in enumerate(BASES[p]):
        for j, b in enumerate(BASES[q]):
            ms = _merge_sign(a, b)
            if ms is None:
                continue
            k = _INDEX[p + q][ms[0]] if p + q <= DIM else None
            if k is None:
                continue
            table.append((i, j, k, float(ms[1])))
    return tuple(table)


_WEDGE = {(p, q): _wedge_table(p, q) for p in range(5) for q in range(5)}

# d table for grade p: entries (i, sigma, k, sign) meaning
# d(f_i dx^I) picks up sign * (d_sigma f_i) on basis element k of grade p+1.
_DTAB = {
    p: tuple(
        (i, sigma, _INDEX[p + 1][ms[0]], float(ms[1]))
        for i, a in enumerate(BASES[p])
        for sigma in range(DIM)
        for ms in [_merge_sign((sigma,), a)]
        if ms is not None and p + 1 <= DIM
    )
    for p in range(5)
}


class MatrixForm:
    """Matrix of complex differential forms of a single grade.

    Parameters
    ----------
    rows, cols : int
        Matrix shape.
    grade : int
        Common form grade of all entries.
    v : ndarray (nb, rows, cols)
        Coefficient values over the grade's multi-index basis.
    g : ndarray (nb, rows, cols, 4), optional
        Coefficient gradients (jet depth >= 1).
    h : ndarray (nb, rows, cols, 4, 4), optional
        Coefficient Hessians (jet depth 2).
    """

    __slots__ = ("rows", "cols", "grade", "v", "g", "h")

    def __init__(self, rows, cols, grade, v, g=None, h=None):
        self.rows = int(rows)
        self.cols = int(cols)
        self.grade = int(grade)
        nb = len(BASES[self.grade])
        self.v = np.asarray(v, dtype=complex)
        self.g = None if g is None else np.asarray(g, dtype=complex)
        self.h = None if h is None else np.asarray(h, dtype=complex)
        if self.v.shape != (nb, rows, cols):
            raise ShapeMismatchError(
                f"value block {self.v.shape} != {(nb, rows, cols)}"
            )
        if self.g is not None and self.g.shape != (nb, rows, cols, DIM):
            raise ShapeMismatchError("gradient block shape mismatch")
        if self.h is not None and self.h.shape != (nb, rows, cols, DIM, DIM):
            raise ShapeMismatchError("hessian block shape mismatch")
        if self.h is not None and self.g is None:
            raise ValueError("hessian block without gradient block")

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, rows, cols, grade, depth=2):
        nb = len(BASES[grade])
        v = np.zeros((nb, rows, cols), dtype=complex)
        g = np.zeros((nb, rows, cols, DIM), dtype=complex) if depth >= 1 else None
        h = np.zeros((nb, rows, cols, DIM, DIM), dtype=complex) if depth == 2 else None
        return cls(rows, cols, grade, v, g, h)

    @classmethod
    def const(cls, matrix, depth=2, grade=0):
        """Grade-`grade` form with constant coefficient matrix on basis slot 0.

        Intended for grade 0 (a constant matrix of functions); for higher
        grades it sets only the first basis coefficient.
        """
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        rows, cols = matrix.shape
        out = cls.zero(rows, cols, grade, depth)
        out.v[0] = matrix
        return out

    @classmethod
    def eye(cls, n, depth=2):
        return cls.const(np.eye(n), depth=depth, grade=0)

    @classmethod
    def from_scalar_jet(cls, jet):
        """1x1 grade-0 form wrapping a scalar jet."""
        out = cls.zero(1, 1, 0, jet.depth)
        out.v[0, 0, 0] = jet.f
        if jet.depth >= 1:
            out.g[0, 0, 0] = jet.g
        if jet.depth == 2:
            out.h[0, 0, 0] = jet.h
        return out

    @classmethod
    def from_jets(cls, rows, cols, grade, jets):
        """Build from a nested table jets[b][i][j] of Jet coefficients."""
        nb = len(BASES[grade])
        depth = min(
            jets[b][i][j].depth
            for b in range(nb)
            for i in range(rows)
            for j in range(cols)
        ) if nb else 2
        out = cls.zero(rows, cols, grade, depth)
        for b in range(nb):
            for i in range(rows):
                for j in range(cols):
                    jet = jets[b][i][j]
                    out.v[b, i, j] = jet.f
                    if depth >= 1:
                        out.g[b, i, j] = jet.g
                    if depth == 2:
                        out.h[b, i, j] = jet.h
        return out

    @classmethod
    def dx(cls, mu, depth=2):
        """The coordinate 1-form dx^mu (constant coefficients)."""
        out = cls.zero(1, 1, 1, depth)
        out.v[mu, 0, 0] = 1.0
        return out

    # -- structure ---------------------------------------------------------

    @property
    def depth(self):
        if self.h is not None:
            return 2
        if self.g is not None:
            return 1
        return 0

    @property
    def nbasis(self):
        return len(BASES[self.grade])

    def truncated(self, depth):
        if depth >= self.depth:
            return self
        return MatrixForm(
            self.rows, self.cols, self.grade, self.v,
            self.g if depth >= 1 else None,
            self.h if depth >= 2 else None,
        )

    def jet(self, b, i, j):
        """Coefficient (basis slot b, entry i,j) as a scalar Jet."""
        return Jet(
            self.v[b, i, j],
            None if self.g is None else self.g[b, i, j],
            None if self.h is None else self.h[b, i, j],
        )

    def entry(self, i, j):
        """The (i, j) entry as a 1x1 MatrixForm."""
        sl = (slice(None), slice(i, i + 1), slice(j, j + 1))
        return MatrixForm(
            1, 1, self.grade, self.v[sl],
            None if self.g is None else self.g[sl],
            None if self.h is None else self.h[sl],
        )

    # -- linear structure --------------------------------------------------

    def _check_same(self, other):
        if (self.rows, self.cols, self.grade) != (other.rows, other.cols, other.grade):
            raise ShapeMismatchError(
                f"{(self.rows, self.cols, self.grade)} vs "
                f"{(other.rows, other.cols, other.grade)}"
            )

    def __add__(self, other):
        if not isinstance(other, MatrixForm):
            return NotImplemented
        self._check_same(other)
        d = min(self.depth, other.depth)
        return MatrixForm(
            self.rows, self.cols, self.grade,
            self.v + other.v,
            self.g + other.g if d >= 1 else None,
            self.h + other.h if d == 2 else None,
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return MatrixForm(
            self.rows, self.cols, self.grade, -self.v,
            None if self.g is None else -self.g,
            None if self.h is None else -self.h,
        )

    def __mul__(self, z):
        if not isinstance(z, numbers.Number):
            return NotImplemented
        return MatrixForm(
            self.rows, self.cols, self.grade, self.v * z,
            None if self.g is None else self.g * z,
            None if self.h is None else self.h * z,
        )

    __rmul__ = __mul__

    def jet_scale(self, jet):
        """Multiply by a scalar-function jet (grade 0), entrywise Leibniz."""
        d = min(self.depth, jet.depth)
        v = self.v * jet.f
        g = h = None
        if d >= 1:
            g = self.g * jet.f + self.v[..., None] * jet.g
        if d == 2:
            cross = self.g[..., :, None] * jet.g[None, None, None, None, :]
            h = (
                self.h * jet.f
                + self.v[..., None, None] * jet.h
                + cross
                + np.swapaxes(cross, -1, -2)
            )
        return MatrixForm(self.rows, self.cols, self.grade, v, g, h)

    # -- wedge product -------------------------------------------------------

    def wedge(self, other):
        """Matrix wedge product: (A ^ B)_ik = sum_j A_ij ^ B_jk."""
        if not isinstance(other, MatrixForm):
            raise TypeError("wedge requires a MatrixForm")
        if self.cols != other.rows:
            raise ShapeMismatchError(
                f"inner dimensions {self.cols} != {other.rows}"
            )
        p, q = self.grade, other.grade
        d = min(self.depth, other.depth)
        out = MatrixForm.zero(self.rows, other.cols, min(p + q, DIM + 1), d)
        if p + q > DIM:
            return out
        for i, j, k, s in _WEDGE[(p, q)]:
            av, bv = self.v[i], other.v[j]
            out.v[k] += s * (av @ bv)
            if d >= 1:
                ag, bg = self.g[i], other.g[j]
                out.g[k] += s * (
                    np.einsum("rms,mc->rcs", ag, bv)
                    + np.einsum("rm,mcs->rcs", av, bg)
                )
            if d == 2:
                cross = np.einsum("rms,mct->rcst", self.g[i], other.g[j])
                out.h[k] += s * (
                    np.einsum("rmst,mc->rcst", self.h[i], bv)
                    + np.einsum("rm,mcst->rcst", av, other.h[j])
                    + cross
                    + np.swapaxes(cross, -1, -2)
                )
        return out

    def __matmul__(self, other):
        return self.wedge(other)

    # -- differential and involutions -----------------------------------------

    def d(self):
        """Exterior derivative; consumes one jet depth, raises grade by one."""
        if self.depth < 1:
            raise JetDepthError(
                "exterior derivative needs jet depth >= 1 "
                f"(form has depth {self.depth})"
            )
        d_out = self.depth - 1
        out = MatrixForm.zero(self.rows, self.cols, self.grade + 1, d_out)
        if self.grade + 1 > DIM:
            return out
        for i, sigma, k, s in _DTAB[self.grade]:
            out.v[k] += s * self.g[i][:, :, sigma]
            if d_out >= 1:
                out.g[k] += s * self.h[i][:, :, sigma, :]
        return out

    def conj(self):
        return MatrixForm(
            self.rows, self.cols, self.grade, np.conj(self.v),
            None if self.g is None else np.conj(self.g),
            None if self.h is None else np.conj(self.h),
        )

    def transpose(self):
        sw = lambda a: None if a is None else np.swapaxes(a, 1, 2)
        return MatrixForm(
            self.cols, self.rows, self.grade, np.swapaxes(self.v, 1, 2),
            sw(self.g), sw(self.h),
        )

    def dagger(self):
        """Conjugate transpose, no grade-dependent sign (see module docstring)."""
        return self.conj().transpose()

    def trace(self):
        tr = lambda a: None if a is None else np.trace(a, axis1=1, axis2=2)[
            (slice(None), None, None) + (slice(None),) * (a.ndim - 3)
        ]
        return MatrixForm(
            1, 1, self.grade,
            np.trace(self.v, axis1=1, axis2=2)[:, None, None],
            tr(self.g), tr(self.h),
        )

    def real(self):
        take = lambda a: None if a is None else a.real
        return MatrixForm(self.rows, self.cols, self.grade,
                          self.v.real, take(self.g), take(self.h))

    def imag(self):
        take = lambda a: None if a is None else a.imag
        return MatrixForm(self.rows, self.cols, self.grade,
                          self.v.imag, take(self.g), take(self.h))

    # -- block assembly ---------------------------------------------------

    @classmethod
    def from_blocks(cls, blocks):
        """Assemble a block matrix of forms; all blocks share one grade."""
        grade = blocks[0][0].grade
        depth = min(b.depth for row in blocks for b in row)
        rows_v = []
        rows_g = []
        rows_h = []
        for row in blocks:
            for b in row:
                if b.grade != grade:
                    raise ShapeMismatchError("blocks must share a grade")
            rows_v.append(np.concatenate([b.v for b in row], axis=2))
            if depth >= 1:
                rows_g.append(np.concatenate([b.truncated(depth).g for b in row], axis=2))
            if depth == 2:
                rows_h.append(np.concatenate([b.truncated(depth).h for b in row], axis=2))
        v = np.concatenate(rows_v, axis=1)
        g = np.concatenate(rows_g, axis=1) if depth >= 1 else None
        h = np.concatenate(rows_h, axis=1) if depth == 2 else None
        return cls(v.shape[1], v.shape[2], grade, v, g, h)

    # -- norms and checks ---------------------------------------------------

    def max_abs(self):
        """Max absolute coefficient value over basis slots and entries."""
        if self.v.size == 0:
            return 0.0
        return float(np.max(np.abs(self.v)))

    def max_abs_imag(self):
        if self.v.size == 0:
            return 0.0
        return float(np.max(np.abs(self.v.imag)))

    def is_zero(self, tol=1e-9):
        return self.max_abs() <= tol

    def __repr__(self):
        return (
            f"MatrixForm({self.rows}x{self.cols}, grade={self.grade}, "
            f"depth={self.depth})"
        )


def residual(a, b):
    """Max-coefficient norm of the difference of two forms."""
    return (a - b).max_abs()


def scalar_identity(n, s):
    """The n x n form  identity * s  for a scalar (1x1) form s of any grade."""
    if (s.rows, s.cols) != (1, 1):
        raise ShapeMismatchError("scalar_identity needs a 1x1 form")
    out = MatrixForm.zero(n, n, s.grade, s.depth)
    idx = np.arange(n)
    out.v[:, idx, idx] = s.v[:, 0, 0][:, None]
    if s.g is not None:
        out.g[:, idx, idx] = s.g[:, 0, 0][:, None]
    if s.h is not None:
        out.h[:, idx, idx] = s.h[:, 0, 0][:, None]
    return out
