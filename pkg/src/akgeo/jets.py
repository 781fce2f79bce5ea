"""Second-order jet arithmetic over a four-dimensional real chart.

A jet carries the value, gradient and symmetric Hessian of a scalar
function at a point.  All arithmetic propagates derivatives exactly
(Leibniz and chain rules), so any quantity assembled from jets is
differentiated analytically rather than by finite differences.

Depth bookkeeping: a jet tracks 0, 1 or 2 derivative orders.  Binary
operations shrink to the shallower operand; taking a derivative
(e.g. an exterior derivative of a form built on jets) consumes one
order.  Requesting derivatives past the tracked depth raises
:class:`JetDepthError` rather than returning silently wrong numbers.
"""

from __future__ import annotations

import numbers

import numpy as np

DIM = 4


class JetDepthError(ValueError):
    """Raised when an operation needs more derivative orders than tracked."""


class Jet:
    """Value, gradient and symmetric Hessian of a scalar at a point.

    Parameters
    ----------
    f : complex
        Value at the base point.
    g : ndarray of shape (4,), optional
        Gradient with respect to the chart coordinates.  ``None`` means
        the jet tracks no first derivatives (depth 0).
    h : ndarray of shape (4, 4), optional
        Symmetric Hessian.  ``None`` means depth <= 1.  Supplying ``h``
        requires ``g``.
    """

    __slots__ = ("f", "g", "h")

    def __init__(self, f, g=None, h=None):
        if h is not None and g is None:
            raise ValueError("a Hessian without a gradient is not a valid jet")
        self.f = complex(f)
        self.g = None if g is None else np.asarray(g, dtype=complex)
        self.h = None if h is None else np.asarray(h, dtype=complex)
        if self.g is not None and self.g.shape != (DIM,):
            raise ValueError(f"gradient shape {self.g.shape} != ({DIM},)")
        if self.h is not None and self.h.shape != (DIM, DIM):
            raise ValueError(f"hessian shape {self.h.shape} != ({DIM},{DIM})")

    # -- constructors ---------------------------------------------------

    @classmethod
    def const(cls, value, depth=2):
        """Jet of a constant: vanishing derivatives to the given depth."""
        if depth == 0:
            return cls(value)
        if depth == 1:
            return cls(value, np.zeros(DIM))
        return cls(value, np.zeros(DIM), np.zeros((DIM, DIM)))

    @classmethod
    def coordinate(cls, mu, x, depth=2):
        """Jet of the chart coordinate x^mu seeded at the point ``x``."""
        g = np.zeros(DIM, dtype=complex)
        g[mu] = 1.0
        if depth == 0:
            return cls(x[mu])
        if depth == 1:
            return cls(x[mu], g)
        return cls(x[mu], g, np.zeros((DIM, DIM)))

    @classmethod
    def linear(cls, coeffs, x, const=0.0, depth=2):
        """Jet of ``const + coeffs . x`` (exact at any depth)."""
        coeffs = np.asarray(coeffs, dtype=complex)
        f = const + coeffs @ np.asarray(x, dtype=complex)
        if depth == 0:
            return cls(f)
        if depth == 1:
            return cls(f, coeffs)
        return cls(f, coeffs, np.zeros((DIM, DIM)))

    # -- structure ------------------------------------------------------

    @property
    def depth(self):
        if self.h is not None:
            return 2
        if self.g is not None:
            return 1
        return 0

    def truncated(self, depth):
        """Copy of this jet keeping at most ``depth`` derivative orders."""
        if depth >= self.depth:
            return self
        if depth == 1:
            return Jet(self.f, self.g)
        return Jet(self.f)

    def conjugate(self):
        return Jet(
            np.conj(self.f),
            None if self.g is None else np.conj(self.g),
            None if self.h is None else np.conj(self.h),
        )

    @property
    def real(self):
        return Jet(
            self.f.real,
            None if self.g is None else self.g.real,
            None if self.h is None else self.h.real,
        )

    @property
    def imag(self):
        return Jet(
            self.f.imag,
            None if self.g is None else self.g.imag,
            None if self.h is None else self.h.imag,
        )

    # -- ring operations ------------------------------------------------

    def __add__(self, other):
        other = _as_jet(other, self.depth)
        d = min(self.depth, other.depth)
        return Jet(
            self.f + other.f,
            self.g + other.g if d >= 1 else None,
            self.h + other.h if d == 2 else None,
        )

    __radd__ = __add__

    def __neg__(self):
        return Jet(
            -self.f,
            None if self.g is None else -self.g,
            None if self.h is None else -self.h,
        )

    def __sub__(self, other):
        return self + (-_as_jet(other, self.depth))

    def __rsub__(self, other):
        return _as_jet(other, self.depth) + (-self)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return Jet(
                self.f * other,
                None if self.g is None else self.g * other,
                None if self.h is None else self.h * other,
            )
        if not isinstance(other, Jet):
            return NotImplemented
        d = min(self.depth, other.depth)
        f = self.f * other.f
        g = h = None
        if d >= 1:
            g = self.g * other.f + other.g * self.f
        if d == 2:
            cross = np.outer(self.g, other.g)
            h = self.h * other.f + other.h * self.f + cross + cross.T
        return Jet(f, g, h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return self * (1.0 / other)
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        return _as_jet(other, self.depth) * self._reciprocal()

    def _reciprocal(self):
        if self.f == 0:
            raise ZeroDivisionError("jet with zero value in denominator")
        v = self.f
        return self._compose(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __pow__(self, p):
        if not isinstance(p, numbers.Number):
            return NotImplemented
        if p == 0:
            return Jet.const(1.0, self.depth)
        if p == 1:
            return self
        if p == 2:
            return self * self
        v = self.f
        return self._compose(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def _compose(self, f0, f1, f2):
        """Chain rule through a scalar function with derivatives f1, f2 at self.f."""
        d = self.depth
        g = h = None
        if d >= 1:
            g = f1 * self.g
        if d == 2:
            h = f1 * self.h + f2 * np.outer(self.g, self.g)
        return Jet(f0, g, h)

    # -- comparisons and misc --------------------------------------------

    def __repr__(self):
        return f"Jet({self.f!r}, depth={self.depth})"


def _as_jet(value, depth):
    if isinstance(value, Jet):
        return value
    if isinstance(value, numbers.Number):
        return Jet.const(value, depth)
    raise TypeError(f"cannot interpret {type(value)!r} as a jet")


# -- analytic primitives ------------------------------------------------


def sin(u):
    if isinstance(u, Jet):
        return u._compose(np.sin(u.f), np.cos(u.f), -np.sin(u.f))
    return np.sin(u)


def cos(u):
    if isinstance(u, Jet):
        return u._compose(np.cos(u.f), -np.sin(u.f), -np.cos(u.f))
    return np.cos(u)


def exp(u):
    if isinstance(u, Jet):
        e = np.exp(u.f)
        return u._compose(e, e, e)
    return np.exp(u)


def log(u):
    if isinstance(u, Jet):
        v = u.f
        return u._compose(np.log(v), 1.0 / v, -1.0 / v**2)
    return np.log(u)


def sqrt(u):
    if isinstance(u, Jet):
        r = np.sqrt(u.f)
        return u._compose(r, 0.5 / r, -0.25 / (r * u.f))
    return np.sqrt(u)
