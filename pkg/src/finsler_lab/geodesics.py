"""Geodesic flow of the spray: x'' + 2 G(x, x') = 0.

Dormand-Prince 5(4) with a PI step controller, integrated for a whole
batch of segments at once (each with its own step size) because the
spray evaluation is vectorized and its cost barely grows with batch size.
Dense output is quintic Hermite on (x, x', x'') at the step nodes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMetricError, DomainError, StiffnessError
from .geometry import spray_coefficients

BOUNDARY_MARGIN = 1e-6
MAX_COORDINATE = 1e3
# a domain rejection below this fraction of the span ends the segment; without
# it, forward-complete metrics creep toward the margin in ever smaller steps
DOMAIN_STEP_FLOOR = 1e-9

# Dormand-Prince coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
ALPHA = 0.7 / 5.0
BETA = 0.4 / 5.0
MIN_FACTOR, MAX_FACTOR = 0.2, 5.0


@dataclass
class GeodesicSegment:
    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    xddot: np.ndarray
    metric_id: str = ""
    steps: int = 0
    rejected: int = 0
    max_error: float = 0.0
    exit_flag: str = "completed"
    stats: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.x.shape[-1]

    @property
    def truncated(self) -> bool:
        return self.exit_flag != "completed"

    def locate(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Dense output (x, x') at times t inside the segment."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = (self.t[0], self.t[-1]) if self.t[-1] >= self.t[0] else (self.t[-1], self.t[0])
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
            raise ValueError("time outside the integrated segment")
        ts = self.t if self.t[-1] >= self.t[0] else self.t[::-1]
        k = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2)
        if self.t[-1] < self.t[0]:
            k = len(self.t) - 2 - k
        return _hermite5(self, k, t)

    def to_csv(self, metric=None) -> str:
        """t, x components, x' components and (optionally) F, at 17 significant digits."""
        n = self.n
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"xdot{i + 1}" for i in range(n)]
        if metric is not None:
            header.append("F")
            F = speeds(metric, self)
        w.writerow(header)
        for j in range(len(self.t)):
            row = [self.t[j], *self.x[j], *self.xdot[j]]
            if metric is not None:
                row.append(F[j])
            w.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()


def _hermite5(seg: GeodesicSegment, k: np.ndarray, t: np.ndarray):
    t0, t1 = seg.t[k], seg.t[k + 1]
    h = (t1 - t0)[:, None]
    s = ((t - t0) / (t1 - t0))[:, None]
    p0, p1 = seg.x[k], seg.x[k + 1]
    v0, v1 = seg.xdot[k] * h, seg.xdot[k + 1] * h
    a0, a1 = seg.xddot[k] * h * h, seg.xddot[k + 1] * h * h
    s2, s3, s4, s5 = s * s, s**3, s**4, s**5
    h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5
    h01 = 10 * s3 - 15 * s4 + 6 * s5
    h10 = s - 6 * s3 + 8 * s4 - 3 * s5
    h11 = -4 * s3 + 7 * s4 - 3 * s5
    h20 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5
    h21 = 0.5 * s3 - s4 + 0.5 * s5
    x = h00 * p0 + h01 * p1 + h10 * v0 + h11 * v1 + h20 * a0 + h21 * a1
    d00 = -30 * s2 + 60 * s3 - 30 * s4
    d10 = 1 - 18 * s2 + 32 * s3 - 15 * s4
    d11 = -12 * s2 + 28 * s3 - 15 * s4
    d20 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4
    d21 = 1.5 * s2 - 4 * s3 + 2.5 * s4
    dx = (d00 * p0 - d00 * p1 + d10 * v0 + d11 * v1 + d20 * a0 + d21 * a1) / h
    return x, dx


def _margin_ok(metric, x: np.ndarray, margin: float) -> np.ndarray:
    ok = np.all(np.isfinite(x), axis=-1)
    constraints = getattr(metric, "all_constraints", None)
    if constraints is None:
        return ok
    xs = [x[..., i] for i in range(x.shape[-1])]
    for _, value in constraints(xs):
        ok &= np.asarray(value) > margin
    return ok


def _accel(metric, x: np.ndarray, v: np.ndarray, margin: float) -> np.ndarray:
    """-2 G(x, v) on rows inside the domain, NaN elsewhere.

    Rows whose metric degenerates (coordinates running off to infinity, as
    great circles do in a projective chart) are treated as outside the domain.
    """
    out = np.full(x.shape, np.nan)
    ok = _margin_ok(metric, x, margin) & np.any(v != 0.0, axis=-1)
    ok &= np.max(np.abs(x), axis=-1) < MAX_COORDINATE
    if not np.any(ok):
        return out
    try:
        out[ok] = -2.0 * spray_coefficients(metric, x[ok], v[ok])
    except (DegenerateMetricError, DomainError):
        for i in np.flatnonzero(ok):
            try:
                out[i] = -2.0 * spray_coefficients(metric, x[i], v[i])
            except (DegenerateMetricError, DomainError):
                pass
    return out


def integrate_batch(
    metric,
    x0,
    y0,
    t_span,
    atol: float = 1e-9,
    rtol: float = 1e-9,
    margin: float = BOUNDARY_MARGIN,
    max_steps: int = 100_000,
    metric_id: str = "",
) -> list[GeodesicSegment]:
    """Integrate one geodesic per row of (x0, y0) over t_span = (t0, t1)."""
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    y0 = np.atleast_2d(np.asarray(y0, dtype=float))
    x0, y0 = np.broadcast_arrays(x0, y0)
    m, n = x0.shape
    t0, t1 = (0.0, float(t_span)) if np.ndim(t_span) == 0 else (float(t_span[0]), float(t_span[1]))
    direction = 1.0 if t1 >= t0 else -1.0
    total = abs(t1 - t0)

    check = getattr(metric, "check_domain", None)
    if check is not None:
        check(x0)
    u = np.concatenate([x0, y0], axis=-1)
    a = _accel(metric, x0, y0, margin)
    if np.any(~np.isfinite(a)):
        raise StiffnessError("initial state lies within the boundary margin")

    def rhs(state):
        x, v = state[:, :n], state[:, n:]
        return np.concatenate([v, _accel(metric, x, v, margin)], axis=-1)

    t = np.full(m, t0)
    h = np.full(m, min(0.01, total) if total > 0 else 0.0)
    err_prev = np.full(m, 1e-4)
    k1 = np.concatenate([y0, a], axis=-1)
    active = np.full(m, total > 0)
    flags = ["completed"] * m
    T = [[t0] for _ in range(m)]
    X = [[x0[i].copy()] for i in range(m)]
    V = [[y0[i].copy()] for i in range(m)]
    Acc = [[a[i].copy()] for i in range(m)]
    steps = np.zeros(m, dtype=int)
    rejected = np.zeros(m, dtype=int)
    max_err = np.zeros(m)

    for _ in range(max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        hh = np.minimum(h[idx], np.abs(t1 - t[idx]))
        hs = direction * hh
        u0 = u[idx]
        ks = [k1[idx]]
        for stage in range(1, 7):
            inc = sum(coef * kk for coef, kk in zip(_A[stage], ks))
            ks.append(rhs(u0 + hs[:, None] * inc))
        u_new = u0 + hs[:, None] * sum(b * kk for b, kk in zip(_B5, ks) if b != 0.0)
        err_vec = hs[:, None] * sum(e * kk for e, kk in zip(_E, ks) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(u0), np.abs(u_new))
        err = np.sqrt(np.mean((err_vec / scale) ** 2, axis=-1))
        bad = ~np.isfinite(err)
        err = np.where(bad, np.inf, err)
        accept = err <= 1.0

        for j, i in enumerate(idx):
            if accept[j]:
                t[i] = t[i] + hs[j]
                u[i] = u_new[j]
                k1[i] = ks[6][j]
                steps[i] += 1
                max_err[i] = max(max_err[i], err[j])
                T[i].append(t[i])
                X[i].append(u_new[j, :n].copy())
                V[i].append(u_new[j, n:].copy())
                Acc[i].append(ks[6][j, n:].copy())
                fac = SAFETY * max(err[j], 1e-10) ** (-ALPHA) * err_prev[i] ** BETA
                h[i] = hh[j] * min(MAX_FACTOR, max(MIN_FACTOR, fac))
                err_prev[i] = max(err[j], 1e-4)
                if abs(t1 - t[i]) <= 1e-14 * max(1.0, abs(t1)):
                    active[i] = False
            else:
                rejected[i] += 1
                if bad[j]:
                    h[i] = 0.25 * hh[j]
                    if h[i] < DOMAIN_STEP_FLOOR * max(1.0, total):
                        flags[i] = "domain_exit"
                        active[i] = False
                    continue
                h[i] = hh[j] * max(MIN_FACTOR, SAFETY * err[j] ** (-ALPHA))
                if h[i] < 1e-13 * max(1.0, abs(t[i])):
                    raise StiffnessError(f"step size underflow at t = {t[i]:.6g}")
    else:
        raise StiffnessError(f"exceeded {max_steps} steps")

    return [
        GeodesicSegment(
            t=np.array(T[i]),
            x=np.array(X[i]),
            xdot=np.array(V[i]),
            xddot=np.array(Acc[i]),
            metric_id=metric_id,
            steps=int(steps[i]),
            rejected=int(rejected[i]),
            max_error=float(max_err[i]),
            exit_flag=flags[i],
        )
        for i in range(m)
    ]


def integrate(metric, x0, y0, t_span, tol: float = 1e-9, metric_id: str = "") -> GeodesicSegment:
    return integrate_batch(metric, x0, y0, t_span, atol=tol, rtol=tol, metric_id=metric_id)[0]


def _evaluate(fn, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.asarray(fn([x[..., i] for i in range(x.shape[-1])], [v[..., i] for i in range(v.shape[-1])]), dtype=float)


def speeds(metric, seg: GeodesicSegment) -> np.ndarray:
    return _evaluate(metric.F, seg.x, seg.xdot)


def speed_drift(metric, seg: GeodesicSegment) -> float:
    F = speeds(metric, seg)
    return float(np.max(np.abs(F - F[0])) / abs(F[0]))


def _quadrature(fn, seg: GeodesicSegment, nodes: int = 8) -> float:
    u, w = np.polynomial.legendre.leggauss(nodes)
    t0, t1 = seg.t[:-1], seg.t[1:]
    half = 0.5 * (t1 - t0)
    tq = (0.5 * (t0 + t1))[:, None] + half[:, None] * u[None, :]
    k = np.repeat(np.arange(len(t0)), nodes)
    x, v = _hermite5(seg, k, tq.ravel())
    vals = _evaluate(fn, x, v).reshape(tq.shape)
    return float(np.sum(np.abs(half)[:, None] * w[None, :] * vals))


def segment_length(metric, seg: GeodesicSegment, reverse: bool = False) -> float:
    """Length of the traced curve; reverse=True measures it traversed backwards."""
    if reverse:
        return _quadrature(lambda x, y: metric.F(x, [-c for c in y]), seg)
    return _quadrature(metric.F, seg)


def alpha_length(metric, seg: GeodesicSegment) -> float:
    return _quadrature(metric.alpha, seg)


def collinearity_residual(seg: GeodesicSegment, dense: int = 4) -> float:
    """Max distance to the total-least-squares line over the Euclidean extent of the points."""
    pts = [seg.x]
    if dense > 0 and len(seg.t) > 1:
        s = (np.arange(1, dense + 1) / (dense + 1))[None, :]
        tq = seg.t[:-1, None] + (seg.t[1:] - seg.t[:-1])[:, None] * s
        k = np.repeat(np.arange(len(seg.t) - 1), dense)
        pts.append(_hermite5(seg, k, tq.ravel())[0])
    P = np.concatenate(pts, axis=0)
    center = P.mean(axis=0)
    Q = P - center
    _, _, vt = np.linalg.svd(Q, full_matrices=False)
    d = vt[0]
    proj = Q @ d
    dist = np.linalg.norm(Q - proj[:, None] * d[None, :], axis=-1)
    extent = proj.max() - proj.min()
    return float(dist.max() / extent)
