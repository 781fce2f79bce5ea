"""Jet arithmetic against a central finite-difference oracle.

The oracle is independent of the jet implementation: evaluate a plain
complex-valued function on shifted points and form second-order central
differences.  Jets must reproduce those derivatives to the stated
relative tolerance, and must satisfy the ring axioms exactly.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from akgeo import jets
from akgeo.jets import DIM, Jet, JetDepthError

STEP = 1e-4
REL = 1e-6


def fd_grad(f, x, step=STEP):
    g = np.zeros(DIM, dtype=complex)
    for mu in range(DIM):
        xp, xm = x.copy(), x.copy()
        xp[mu] += step
        xm[mu] -= step
        g[mu] = (f(xp) - f(xm)) / (2 * step)
    return g


def shifted(x, mu, nu, s1, s2):
    y = x.copy()
    y[mu] += s1
    y[nu] += s2
    return y


def fd_hess(f, x, step=STEP):
    h = np.zeros((DIM, DIM), dtype=complex)
    for mu in range(DIM):
        for nu in range(DIM):
            h[mu, nu] = (
                f(shifted(x, mu, nu, step, step))
                - f(shifted(x, mu, nu, step, -step))
                - f(shifted(x, mu, nu, -step, step))
                + f(shifted(x, mu, nu, -step, -step))
            ) / (4 * step**2)
    return h


def composite(x):
    """Generic smooth test function mixing all primitives."""
    return (
        np.sin(x[0] + 2 * x[1]) * np.exp(0.3 * x[2])
        + (1.5 + np.cos(x[3])) ** 1.7
        + x[0] * x[1] * x[2] / (2.0 + np.sin(x[3]))
        + np.log(2.0 + np.cos(x[0] - x[3]))
        + np.sqrt(1.5 + np.sin(x[1]))
    )


def composite_jet(x):
    X = [Jet.coordinate(mu, x) for mu in range(DIM)]
    return (
        jets.sin(X[0] + 2 * X[1]) * jets.exp(0.3 * X[2])
        + (1.5 + jets.cos(X[3])) ** 1.7
        + X[0] * X[1] * X[2] / (2.0 + jets.sin(X[3]))
        + jets.log(2.0 + jets.cos(X[0] - X[3]))
        + jets.sqrt(1.5 + jets.sin(X[1]))
    )


@pytest.mark.parametrize("seed", range(4))
def test_jet_matches_central_differences(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, DIM)
    j = composite_jet(x)
    assert j.depth == 2
    assert abs(j.f - composite(x)) < 1e-12
    g_ref = fd_grad(composite, x)
    h_ref = fd_hess(composite, x)
    scale_g = max(1.0, np.max(np.abs(g_ref)))
    scale_h = max(1.0, np.max(np.abs(h_ref)))
    assert np.max(np.abs(j.g - g_ref)) / scale_g < REL
    assert np.max(np.abs(j.h - h_ref)) / scale_h < REL


def test_hessian_is_symmetric_exactly():
    rng = np.random.default_rng(7)
    x = rng.uniform(-1.0, 1.0, DIM)
    j = composite_jet(x)
    assert np.array_equal(j.h, j.h.T)


def test_depth_tracking_and_truncation():
    x = np.array([0.3, -0.2, 0.1, 0.5])
    full = Jet.coordinate(1, x, depth=2)
    shallow = Jet.coordinate(2, x, depth=1)
    value_only = Jet.coordinate(3, x, depth=0)
    assert (full * shallow).depth == 1
    assert (full + value_only).depth == 0
    assert full.truncated(0).depth == 0
    assert (full * full).depth == 2


def test_complex_arithmetic_and_conjugate():
    x = np.array([0.4, 0.1, -0.3, 0.2])
    z = Jet.coordinate(0, x) + 1j * Jet.coordinate(1, x)
    w = z * z.conjugate()
    assert abs(w.f - (x[0] ** 2 + x[1] ** 2)) < 1e-14
    assert np.max(np.abs(w.g.imag)) < 1e-14
    assert np.max(np.abs(w.h.imag)) < 1e-14


finite = st.floats(min_value=-5, max_value=5, allow_nan=False)


@given(a=finite, b=finite, c=finite)
@settings(max_examples=50, deadline=None)
def test_ring_axioms(a, b, c):
    x = np.array([0.2, -0.4, 0.7, -0.1])
    u = a + Jet.coordinate(0, x) * b
    v = c + Jet.coordinate(2, x)
    w = Jet.coordinate(1, x) - a
    lhs = u * (v + w)
    rhs = u * v + u * w
    assert abs(lhs.f - rhs.f) < 1e-9
    assert np.allclose(lhs.g, rhs.g, atol=1e-9)
    assert np.allclose(lhs.h, rhs.h, atol=1e-9)


def test_division_by_zero_value_raises():
    x = np.zeros(DIM)
    with pytest.raises(ZeroDivisionError):
        Jet.const(1.0) / Jet.coordinate(0, x)


def test_reciprocal_roundtrip():
    x = np.array([0.9, 0.1, 0.2, 0.3])
    u = 2.0 + jets.sin(Jet.coordinate(0, x))
    one = u * (1.0 / u)
    assert abs(one.f - 1.0) < 1e-14
    assert np.max(np.abs(one.g)) < 1e-14
    assert np.max(np.abs(one.h)) < 1e-13
