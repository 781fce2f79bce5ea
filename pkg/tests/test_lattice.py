"""Discrete action, gradients, residual norms and descent on the periodic grid."""

import csv
import json
import math

import numpy as np
import pytest
import torch

from akgeo.frames import AbelianField, DegenerateFrameError, PerturbedFrame, frame_field
from akgeo.gauge import metric_lagrangian_density
from akgeo.geometry import curvature, solve_levi_civita
from akgeo.lattice import (
    FlowConfig,
    LatticeState,
    configure_threads,
    descend,
    gradient_norm,
    lattice_action,
    lattice_gradient,
    lattice_residuals,
)

TORUS_VOL = (2.0 * math.pi) ** 4


def smooth_fields(amplitude=3e-2, kmax=1):
    # kmax=1 keeps every mode resolved on the n=4 grid; kmax=2 sits at its
    # Nyquist limit and wrecks the convergence order measurement.
    ff = PerturbedFrame.seeded(3, amplitude=amplitude, kmax=kmax)
    af = AbelianField.seeded(4, amplitude=amplitude, kmax=kmax)
    return ff, af


def chart_integral(ff, af, lam, mu_t, grid=5):
    # Trapezoid quadrature of the jet-exact density; spectrally accurate for
    # trig-polynomial data once grid exceeds the bandwidth.
    hq = 2.0 * math.pi / grid
    total = 0.0
    for idx in np.ndindex(grid, grid, grid, grid):
        x = hq * np.asarray(idx, dtype=float)
        cof = ff.coframe_at(x, 2)
        R = curvature(solve_levi_civita(cof))
        dens = metric_lagrangian_density(cof, R, af.at(x, 2), lam, lam * mu_t)
        total += dens.v[0, 0, 0].real
    return hq**4 * total


def test_flat_action_values():
    st = LatticeState.flat(6)
    assert lattice_action(st, FlowConfig(mu_tilde=3.0)) == 0.0
    a4 = lattice_action(st, FlowConfig(mu_tilde=4.0))
    assert abs(a4 + 2.0 * TORUS_VOL) < 1e-9
    a4_half = lattice_action(st, FlowConfig(mu_tilde=4.0, lambda_overall=0.5))
    assert abs(a4_half + TORUS_VOL) < 1e-9


def test_flat_state_is_critical_only_at_three():
    st = LatticeState.flat(4)
    assert gradient_norm(*lattice_gradient(st, FlowConfig(mu_tilde=3.0))) == 0.0
    assert gradient_norm(*lattice_gradient(st, FlowConfig(mu_tilde=4.0))) > 1.0


def test_gradient_matches_central_differences():
    cfg = FlowConfig(mu_tilde=3.5, lambda_overall=1.2)
    st = LatticeState.perturbed(4, seed=0, amplitude=1e-2)
    ge, ga = lattice_gradient(st, cfg)
    rng = np.random.default_rng(5)
    step = 1e-5
    for _ in range(10):
        site = tuple(int(v) for v in rng.integers(0, 4, size=4))
        if rng.integers(0, 2) == 0:
            ix = site + (int(rng.integers(0, 4)), int(rng.integers(0, 4)))
            table, grad = st.e, ge
        else:
            ix = site + (int(rng.integers(0, 4)),)
            table, grad = st.a, ga
        keep = float(table[ix])  # copy; indexing the tensor yields a view
        table[ix] = keep + step
        up = lattice_action(st, cfg)
        table[ix] = keep - step
        down = lattice_action(st, cfg)
        table[ix] = keep
        fd = (up - down) / (2.0 * step)
        assert abs(fd - float(grad[ix])) <= 1e-6 * max(abs(fd), 1.0)


def test_gradient_linear_in_lambda():
    st = LatticeState.perturbed(4, seed=1, amplitude=1e-2)
    ge1, ga1 = lattice_gradient(st, FlowConfig(mu_tilde=3.5, lambda_overall=1.0))
    ge2, ga2 = lattice_gradient(st, FlowConfig(mu_tilde=3.5, lambda_overall=2.0))
    gem, gam = lattice_gradient(st, FlowConfig(mu_tilde=3.5, lambda_overall=-1.0))
    assert float((ge2 - 2.0 * ge1).abs().max()) < 1e-12
    assert float((ga2 - 2.0 * ga1).abs().max()) < 1e-12
    assert float((gem + ge1).abs().max()) < 1e-12
    assert float((gam + ga1).abs().max()) < 1e-12


def test_descend_first_step_flips_with_lambda():
    st = LatticeState.perturbed(4, seed=1, amplitude=1e-2)
    fwd, _ = descend(st, FlowConfig(mu_tilde=3.5, lambda_overall=1.0, max_iters=1))
    bwd, _ = descend(st, FlowConfig(mu_tilde=3.5, lambda_overall=-1.0, max_iters=1))
    d1 = (fwd.e - st.e).reshape(-1)
    d2 = (bwd.e - st.e).reshape(-1)
    cos = float(d1 @ d2) / (float(d1.norm()) * float(d2.norm()))
    assert abs(cos + 1.0) < 1e-10


def test_flat_residuals():
    st = LatticeState.flat(4)
    res3 = lattice_residuals(st, 3.0)
    for key in ("r_ric20", "r_da20", "r_domega", "r_mainfeq", "j_defect"):
        assert res3[key] == 0.0
    assert res3["mainfeq_conditional"] is False
    res4 = lattice_residuals(st, 4.0)
    # main equation defect on flat data at mu_t = 4 is the kahler form itself
    assert abs(res4["r_mainfeq"] - 2.0 * (2.0 * math.pi) ** 2) < 1e-10
    assert res4["r_ric20"] == 0.0
    assert res4["r_da20"] == 0.0
    assert res4["r_domega"] == 0.0


def test_degenerate_site_is_named():
    st = LatticeState.flat(4)
    st.e[1, 2, 3, 0] = 0.0
    with pytest.raises(DegenerateFrameError, match=r"site \(1, 2, 3, 0\)"):
        lattice_action(st, FlowConfig(mu_tilde=3.0))


def test_nontoral_frames_rejected():
    for name in ("s2xr2", "cp2"):
        with pytest.raises(ValueError, match="not periodic"):
            LatticeState.from_frame_field(frame_field(name), 4)


def test_sampler_matches_pointwise_evaluation():
    ff = PerturbedFrame.seeded(11, amplitude=2e-2)
    af = AbelianField.seeded(12, amplitude=2e-2)
    st = LatticeState.from_frame_field(ff, 4, a_field=af)
    h = st.h
    for idx in ((0, 0, 0, 0), (1, 3, 0, 2), (3, 3, 3, 3), (2, 0, 1, 3)):
        x = h * np.asarray(idx, dtype=float)
        e_ref = ff.coframe_at(x, 0).values()
        a_ref = np.array([af.components[mu].at(x, 0).f.real for mu in range(4)])
        assert np.abs(st.e[idx].numpy() - e_ref).max() < 1e-15
        assert np.abs(st.a[idx].numpy() - a_ref).max() < 1e-15


def test_action_gauge_and_translation_invariant():
    cfg = FlowConfig(mu_tilde=3.5, lambda_overall=1.2)
    st = LatticeState.perturbed(4, seed=2, amplitude=1e-2)
    base = lattice_action(st, cfg)
    theta = 0.7
    rot = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    U = rot @ np.diag([np.exp(0.3j), np.exp(-0.3j)])
    assert abs(lattice_action(st.gauge_rotate(U), cfg) - base) < 1e-11
    assert abs(lattice_action(st.translate((1, 3, 0, 2)), cfg) - base) < 1e-11


def test_action_converges_at_second_order():
    ff, af = smooth_fields()
    lam, mu_t = 1.2, 3.5
    cfg = FlowConfig(mu_tilde=mu_t, lambda_overall=lam)
    acts = {
        n: lattice_action(LatticeState.from_frame_field(ff, n, a_field=af), cfg)
        for n in (4, 8, 16)
    }
    ref = chart_integral(ff, af, lam, mu_t)
    errs = {n: acts[n] - ref for n in acts}
    assert abs(errs[4]) > abs(errs[8]) > abs(errs[16])
    # n=4 resolves kmax=1 only marginally (kh = pi/2), so the clean h^2 ratio
    # shows up between n=8 and n=16
    assert 2.5 < errs[8] / errs[16] < 5.5
    richardson = acts[16] + (acts[16] - acts[8]) / 3.0
    assert abs(richardson - ref) < abs(errs[16]) / 3.0


def test_descend_flat_terminates_immediately():
    final, log = descend(LatticeState.flat(4), FlowConfig(mu_tilde=3.0))
    assert log.reason == "grad_tol"
    assert len(log.rows) == 1
    assert float((final.e - LatticeState.flat(4).e).abs().max()) == 0.0
    for key in ("r_ric20", "r_da20", "r_domega", "r_mainfeq"):
        assert log.final_residuals[key] <= 1e-8


def test_descend_relaxes_perturbed_state():
    st = LatticeState.perturbed(4, seed=0, amplitude=1e-2)
    final, log = descend(st, FlowConfig(mu_tilde=3.0, max_iters=200))
    actions = [row["action"] for row in log.rows]
    assert all(b <= a + 1e-12 for a, b in zip(actions, actions[1:]))
    start = log.rows[0]["r_mainfeq"]
    end = log.final_residuals["r_mainfeq"]
    assert end <= start / 10.0
    assert log.reason in ("grad_tol", "max_iters", "line_search_underflow")


def test_flow_log_emission(tmp_path):
    st = LatticeState.perturbed(4, seed=0, amplitude=1e-2)
    _, log = descend(st, FlowConfig(mu_tilde=3.5, max_iters=3))
    jpath = tmp_path / "flow.jsonl"
    cpath = tmp_path / "flow.csv"
    log.write_jsonl(jpath)
    log.write_csv(cpath)

    lines = jpath.read_text().splitlines()
    assert len(lines) == len(log.rows) + 1
    first = json.loads(lines[0])
    assert set(first) == set(log.FIELDS)
    trailer = json.loads(lines[-1])
    assert trailer["reason"] == log.reason
    assert trailer["final_residuals"]["r_mainfeq"] == log.final_residuals["r_mainfeq"]

    with open(cpath) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(log.rows)
    assert float(rows[0]["action"]) == log.rows[0]["action"]


def test_flow_config_validation():
    with pytest.raises(ValueError, match="step"):
        FlowConfig(mu_tilde=3.0, step=0.0)
    with pytest.raises(ValueError, match="grad_tol"):
        FlowConfig(mu_tilde=3.0, grad_tol=-1.0)
    with pytest.raises(ValueError, match="backtracking"):
        FlowConfig(mu_tilde=3.0, backtrack=1.0)


def test_state_shape_validation():
    with pytest.raises(ValueError, match="coframe table"):
        LatticeState(torch.zeros((4, 4, 4, 4, 4, 3)), torch.zeros((4, 4, 4, 4, 4)))
    with pytest.raises(ValueError, match="potential table"):
        LatticeState(LatticeState.flat(4).e, torch.zeros((4, 4, 4, 4, 3)))


def test_save_load_roundtrip(tmp_path):
    st = LatticeState.perturbed(4, seed=7, amplitude=1e-2)
    path = tmp_path / "state.json"
    st.save(path)
    back = LatticeState.load(path)
    assert float((back.e - st.e).abs().max()) == 0.0
    assert float((back.a - st.a).abs().max()) == 0.0

    payload = json.loads(path.read_text())
    payload["format"] = "something-else"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(payload))
    with pytest.raises(ValueError, match="not a lattice state"):
        LatticeState.load(bad)
    payload = json.loads(path.read_text())
    payload["version"] = 99
    bad.write_text(json.dumps(payload))
    with pytest.raises(ValueError, match="version"):
        LatticeState.load(bad)


def test_configure_threads(monkeypatch):
    before = torch.get_num_threads()
    try:
        monkeypatch.setenv("AKGEO_THREADS", "2")
        configure_threads()
        assert torch.get_num_threads() == 2
        monkeypatch.delenv("AKGEO_THREADS")
        configure_threads(default=1)
        assert torch.get_num_threads() == 1
    finally:
        torch.set_num_threads(before)
