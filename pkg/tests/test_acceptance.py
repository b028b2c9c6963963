"""Acceptance suite: one PASS/FAIL line per criterion 1..14.

Each test records its line in ``conftest.ACCEPTANCE_LINES`` (printed in the
pytest terminal summary) and also prints it, so ``pytest -s`` or running this
file directly shows the lines inline.
"""

from __future__ import annotations

import numpy as np
import pytest

import conftest
from fd_oracle import FDOracle, f_squared, multi_indices
from finsler_lab import geodesics, jets
from finsler_lab import nonriemannian as nr
from finsler_lab import randers as rs
from finsler_lab import verify as vf
from finsler_lab.catalog import build_catalog_entry, coords
from finsler_lab.geometry import LocalGeometry
from finsler_lab.sampling import sample_directions, sample_states

SEED = 20240607

# every catalog family, n = 2, with representative admissible parameters
ALL_FAMILIES = [
    ("space_form", {"mu": 0}, 2, "+"),
    ("space_form", {"mu": -1}, 2, "+"),
    ("space_form", {"mu": 1}, 2, "+"),
    ("funk", {"a": [0.0, 0.0]}, 2, "+"),
    ("b1", {"lambda": 1.0, "a": [0.5, 0.0]}, 2, "+"),
    ("b2", {"k": 1.0, "a": [0.0, 0.0]}, 2, "+"),
    ("b3", {"eps": 0.3, "a": [0.0, 0.0]}, 2, "+"),
    ("example31", {"eps": 0.5}, 2, "+"),
    ("example41", {"lambda": 1.0}, 2, "+"),
    ("example42", {}, 2, "+"),
]
B_CONFIGS = [
    ("b1", {"lambda": 1.0, "a": [0.5, 0.0]}, 2, "+"),
    ("b2", {"k": 1.0, "a": [0.0, 0.0]}, 2, "+"),
    ("b2", {"k": 2.0, "a": [0.5, 0.0]}, 2, "+"),
    ("b3", {"eps": 0.3, "a": [0.0, 0.0]}, 2, "+"),
    ("b3", {"eps": 0.2, "a": [0.3, 0.0]}, 2, "+"),
]
SPACE_FORMS = [c for c in ALL_FAMILIES if c[0] == "space_form"]


def _entry(cfg):
    family, params, n, sign = cfg
    return build_catalog_entry(family, params, n=n, sign=sign)


def _label(cfg) -> str:
    family, params, n, sign = cfg
    p = ",".join(f"{k}={v}" for k, v in params.items())
    return f"{family}({p};n={n};{sign})"


def _record(number: int, title: str, checks: list[tuple[str, float, float]]) -> None:
    """checks: (label, worst, tolerance). Emits the line, then asserts."""
    failed = [(lab, w, t) for lab, w, t in checks if not (np.isfinite(w) and w <= t)]
    worst = max(checks, key=lambda c: c[1] / c[2] if np.isfinite(c[1]) else np.inf)
    status = "FAIL" if failed else "PASS"
    detail = f"worst {worst[0]} = {worst[1]:.3g} (tol {worst[2]:.0e})"
    if failed:
        detail += "; failing: " + ", ".join(f"{lab} = {w:.3g} > {t:.0e}" for lab, w, t in failed)
    line = f"criterion {number}: {status} {title}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failed, line


def _results_by_id(results) -> dict:
    out = {}
    for r in results:
        out.setdefault(r.identity_id, []).append(r)
    return out


# ------------------------------------------------------------------ 1
def test_criterion_01_funk_constant_curvature():
    checks = []
    for n in (2, 3):
        for a in (0.0, 0.3):
            entry = build_catalog_entry("funk", {"a": [a] + [0.0] * (n - 1)}, n=n)
            x, y = sample_states(entry, 200, SEED)
            K = LocalGeometry(entry.metric, x, y).scalar_curvature.K_scalar
            checks.append((f"funk(|a|={a};n={n})", float(np.max(np.abs(K + 0.25))), 1e-7))
    _record(1, "Funk K = -1/4 at 200 states, |a| in {0, 0.3}, n in {2, 3}", checks)


# ------------------------------------------------------------------ 2
def test_criterion_02_classification_curvature():
    checks = []
    for cfg in B_CONFIGS:
        entry = _entry(cfg)
        x, y = sample_states(entry, 100, SEED)
        K = LocalGeometry(entry.metric, x, y).scalar_curvature.K_scalar
        Kref = np.asarray(entry.K_ref(coords(x), coords(y)), float)
        checks.append((_label(cfg), float(np.max(np.abs(K - Kref) / np.abs(Kref))), 1e-6))
    _record(2, "B-family K against the closed-form curvature, rel, 100 states", checks)


# ------------------------------------------------------------------ 3
def test_criterion_03_isotropic_s_curvature():
    checks = []
    for cfg in ALL_FAMILIES:
        entry = _entry(cfg)
        x, y = sample_states(entry, 100, SEED)
        lg = LocalGeometry(entry.metric, x, y)
        S1 = rs.s_curvature_randers(entry.metric, x, y)
        S2 = nr.s_curvature_tau(entry.metric, x, y, lg).S
        c = np.broadcast_to(np.asarray(entry.c_ref(coords(lg.x)), float), lg.F.shape)
        ref = (entry.n + 1) * c * lg.F
        checks.append((f"{_label(cfg)} S=(n+1)cF", float(np.max(np.abs(S1 - ref) / (1.0 + np.abs(ref)))), 1e-8))
        checks.append((f"{_label(cfg)} two routes", float(np.max(np.abs(S1 - S2))), 1e-6))
    _record(3, "S = (n+1) c F and closed-form S = tau-route S, all families", checks)


# ------------------------------------------------------------------ 4
def test_criterion_04_isotropic_mean_landsberg():
    checks = []
    for cfg in [ALL_FAMILIES[3]] + B_CONFIGS[:1] + B_CONFIGS[1:2] + B_CONFIGS[3:4] + [ALL_FAMILIES[7]]:
        entry = _entry(cfg)
        x, y = sample_states(entry, 100, SEED)
        lg = LocalGeometry(entry.metric, x, y)
        I = nr.cartan(entry.metric, x, y, lg).I
        J = nr.mean_landsberg(entry.metric, x, y, lg).J
        c = np.broadcast_to(np.asarray(entry.c_ref(coords(lg.x)), float), lg.F.shape)
        cFI = (c * lg.F)[:, None] * I
        scale = 1.0 + np.linalg.norm(J, axis=-1) + np.linalg.norm(cFI, axis=-1)
        checks.append((_label(cfg), float(np.max(np.linalg.norm(J + cFI, axis=-1) / scale)), 1e-6))
    _record(4, "J + c F I = 0 at 100 states", checks)


# ------------------------------------------------------------------ 5
def test_criterion_05_sigma_extraction():
    checks = []
    Y = sample_directions(2, 20, SEED + 2)
    for cfg in ALL_FAMILIES:
        entry = _entry(cfg)
        X, _ = sample_states(entry, 20, SEED)
        est, res = vf.verify_sigma_extraction(entry, X, Y)
        checks.append((f"{_label(cfg)} y-spread", res.max_residual, 1e-7))
        if cfg[0] == "example31":
            ref = np.asarray(entry.sigma_ref(coords(X)), float)
            checks.append((f"{_label(cfg)} sigma(x)", float(np.max(np.abs(est.sigma_at_x - ref))), 1e-8))
    _record(5, "K - 3 dc(y)/F independent of y on 20 x 20 grids; example31 sigma", checks)


# ------------------------------------------------------------------ 6
def _nu_at(entry, x, y, sigma):
    lg = LocalGeometry(entry.metric, x, y)
    K = lg.scalar_curvature.K_scalar
    c = float(np.asarray(entry.c_ref(coords(lg.x)), float).ravel()[0])
    tau = nr.distortion(entry.metric, x, y, lg).tau
    return float(K[0]), float(((K + 0.5 * (3 * c * c + sigma)) * np.exp(2 * tau / (entry.n + 1)))[0])


def test_criterion_06_example31_closed_forms():
    checks = []
    for eps in (0.5, 1.0):
        entry = build_catalog_entry("example31", {"eps": eps}, n=2)
        x, y = sample_states(entry, 50, SEED)
        lg = LocalGeometry(entry.metric, x, y)
        comp = 1.0 - rs.beta_norm_squared_jet(entry.metric, jets.seed_vars(x, 0)).coeffs[..., 0]
        comp_ref = np.asarray(entry.beta_complement_ref(coords(x)), float)
        checks.append((f"eps={eps} 1-|b|^2", float(np.max(np.abs(comp - comp_ref))), 1e-8))
        Kref = np.asarray(entry.K_ref(coords(x), coords(y)), float)
        K = lg.scalar_curvature.K_scalar
        checks.append((f"eps={eps} K", float(np.max(np.abs(K - Kref) / (1.0 + np.abs(Kref)))), 1e-8))
        for r in vf.check_closed_forms(entry, x, y):
            checks.append((f"eps={eps} {r.identity_id}", r.max_residual, 1e-8))
        Y = sample_directions(2, 8, SEED + 2)
        res = _results_by_id(vf.verify_nu_form(entry, x, Y))
        for key in ("sigma_closed_form", "nu_closed_form"):
            checks.append((f"eps={eps} {key}", res[key][0].max_residual, 1e-8))

        # spot values at the origin
        origin = np.zeros((1, 2))
        dirs = sample_directions(2, 8, SEED)
        est, _ = vf.verify_sigma_extraction(entry, origin, dirs)
        sigma = float(est.sigma_at_x[0])
        K0, nu0 = _nu_at(entry, origin, np.array([[1.0, 0.0]]), sigma)
        expect = {0.5: (7.25, 12.0, 7.25), 1.0: (2.0, 3.0, 2.0)}[eps]
        for name, got, want in zip(("sigma", "nu", "K"), (sigma, nu0, K0), expect):
            checks.append((f"eps={eps} {name}(0)={got:.12g}", abs(got - want), 1e-8))
    _record(6, "example31 closed forms at 50 states and origin spot values", checks)


# ------------------------------------------------------------------ 7
def test_criterion_07_distortion_quadrature():
    checks = []
    for cfg in (ALL_FAMILIES[3], ("funk", {"a": [0.3, 0.0]}, 2, "+"), ALL_FAMILIES[7]):
        entry = _entry(cfg)
        x, y = sample_states(entry, 50, SEED)
        r = vf.check_distortion_quadrature(entry, x, y)
        checks.append((_label(cfg), r.max_residual, 1e-6))
    _record(7, "closed-form tau against indicatrix quadrature, n = 2, 50 states", checks)


# ------------------------------------------------------------------ 8
def test_criterion_08_curvature_equation():
    checks = []
    for cfg in B_CONFIGS + SPACE_FORMS + [("space_form", {"mu": -1}, 3, "+")]:
        entry = _entry(cfg)
        x, y = sample_states(entry, 100, SEED)
        checks.append((_label(cfg), float(np.max(rs.ric1_residual(entry.metric, x, y))), 1e-6))
    _record(8, "Randers curvature equation at 100 states", checks)


# ------------------------------------------------------------------ 9
def test_criterion_09_pde_residuals():
    checks = []
    for cfg in B_CONFIGS:
        entry = _entry(cfg)
        x, _ = sample_states(entry, 50, SEED)
        checks.append((f"{_label(cfg)} c-equation", float(np.max(rs.c_equation_residual(entry, x))), 1e-8))
        checks.append((f"{_label(cfg)} b from c", float(np.max(rs.babb1_residual(entry, x))), 1e-8))
        if cfg[0] == "b3":
            r = float(np.max(rs.potential_hessian_residual(entry, x)))
            checks.append((f"{_label(cfg)} potential Hessian", r, 1e-8))
    _record(9, "c-equation, b = -2 dc/(mu + 4c^2) and potential Hessian at 50 points", checks)


# ------------------------------------------------------------------ 10
def test_criterion_10_scalar_curvature_property():
    checks = []
    for cfg in ALL_FAMILIES:
        entry = _entry(cfg)
        x, y = sample_states(entry, 50, SEED)
        res = _results_by_id(vf.check_pointwise(entry, x, y, edge_seed=SEED + 1))
        checks.append((f"{_label(cfg)} edges", res["flag_independence"][0].max_residual, 1e-7))
        checks.append((f"{_label(cfg)} tensor", res["scalar_curvature_property"][0].max_residual, 1e-6))
    _record(10, "flag curvature independent of 20 transverse edges; K^i_k = K F^2 h^i_k", checks)


# ------------------------------------------------------------------ 11
def test_criterion_11_geodesics():
    checks = []
    for cfg in ALL_FAMILIES:
        entry = _entry(cfg)
        x, y = sample_states(entry, 20, SEED + 3, radius=0.5 * (entry.domain_radius or 1.0))
        segs = geodesics.integrate_batch(entry.metric, x, y, 1.0, metric_id=entry.family)
        col = max(geodesics.collinearity_residual(s) for s in segs)
        checks.append((f"{_label(cfg)} straightness", col, 1e-6))
        drift = max(geodesics.speed_drift(entry.metric, s) for s in segs)
        checks.append((f"{_label(cfg)} drift", drift, 1e-7))
        if cfg[0] == "b3":
            worst = 0.0
            for s in segs:
                dL = geodesics.segment_length(entry.metric, s) - geodesics.alpha_length(entry.metric, s)
                dh = float(rs.potential_h(entry, s.x[0])) - float(rs.potential_h(entry, s.x[-1]))
                worst = max(worst, abs(dL - dh))
            checks.append((f"{_label(cfg)} length-potential", worst, 1e-7))
    _record(11, "collinearity on 20 segments per family, speed drift, B3 length identity", checks)


# ------------------------------------------------------------------ 12
def test_criterion_12_b3_bounds():
    checks = []
    for cfg in B_CONFIGS[3:]:
        entry = _entry(cfg)
        x, y = sample_states(entry, 100, SEED)
        d = rs.delta(entry, x)
        checks.append((f"{_label(cfg)} std(delta)", float(np.std(d)), 1e-8))
        K = LocalGeometry(entry.metric, x, y).scalar_curvature.K_scalar
        lower, upper = rs.curvature_bounds(d)
        out = float(np.max(np.maximum(np.maximum(lower - K, K - upper), 0.0)))
        checks.append((f"{_label(cfg)} bounds", out, 1e-9))
    _record(12, "delta constant and K within the delta bounds on B3, 100 points", checks)


# ------------------------------------------------------------------ 13
def test_criterion_13_derivative_engine_vs_fd():
    checks = []
    for cfg in ALL_FAMILIES:
        entry = _entry(cfg)
        n = entry.n
        x, y = sample_states(entry, 50, SEED)
        S = jets.seed(x, y, 4)
        F = entry.metric.F(S[:n], S[n:])
        F2 = F * F
        idx = list(multi_indices(2 * n, 4))
        worst = 0.0
        for s in range(len(x)):
            oracle = FDOracle(f_squared(entry.metric, n), np.concatenate([x[s], y[s]]))
            for a in idx:
                exact = jets.partial(F2[s], a)
                worst = max(worst, abs(oracle.partial(a) - exact) / max(1.0, abs(exact)))
        checks.append((_label(cfg), worst, 1e-6))
    _record(13, "all partials of F^2 to order 4 against Richardson FD, 50 states", checks)


# ------------------------------------------------------------------ 14
def test_criterion_14_curvature_y_derivative():
    checks = []
    for cfg in (ALL_FAMILIES[7], ("example31", {"eps": 1.0}, 2, "+"), ALL_FAMILIES[3], ("funk", {"a": [0.3, 0.0]}, 2, "+")):
        entry = _entry(cfg)
        x, y = sample_states(entry, 50, SEED)
        r = vf.verify_curvature_y_derivative(entry, x, y)
        checks.append((_label(cfg), r.max_residual, 1e-4))
    _record(14, "curvature y-derivative identity with FD K_y", checks)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
