"""Non-Riemannian quantities: Cartan torsion, distortion, S-curvature, mean Landsberg.

All quantities vanish for Riemannian metrics. The S-curvature is computed
along two independent routes (the Randers formula from alpha-covariant
derivatives of b, and the horizontal derivative of the distortion along
the spray), and the distortion itself has a closed form for Randers
metrics plus a volume-quadrature oracle for n = 2, 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import jets
from .catalog import RandersMetric, coords
from .errors import UnsupportedConfigurationError
from .geometry import LocalGeometry, PointState
from .jets import Jet
from .randers import beta_log_norm, s_curvature_randers

HOMOGENEITY_SCALES = (0.5, 2.0, 3.0)


@dataclass(frozen=True)
class ScalarField:
    """A scalar function of (x, y) over generic scalars, optionally homogeneous in y."""

    rule: Callable
    homogeneity_degree: Optional[int] = None

    def __call__(self, x, y):
        return self.rule(x, y)

    def homogeneity_defect(self, x, y) -> float:
        """Max relative defect of f(x, l y) = l^d f(x, y) over the sample scales l."""
        if self.homogeneity_degree is None:
            raise ValueError("no homogeneity degree declared")
        xs, ys = coords(x), coords(y)
        base = np.asarray(self.rule(xs, ys), dtype=float)
        worst = 0.0
        for lam in HOMOGENEITY_SCALES:
            scaled = np.asarray(self.rule(xs, [lam * v for v in ys]), dtype=float)
            ref = lam**self.homogeneity_degree * base
            worst = max(worst, float(np.max(np.abs(scaled - ref) / np.maximum(np.abs(ref), 1e-300))))
        return worst


@dataclass(frozen=True)
class TorsionData:
    C: np.ndarray  # C[..., i, j, k]
    I: np.ndarray
    I_tau: Optional[np.ndarray]  # y-gradient of the Randers distortion, when available
    at: PointState


@dataclass(frozen=True)
class DistortionValue:
    tau: np.ndarray
    route: str


@dataclass(frozen=True)
class SCurvatureValue:
    S: np.ndarray
    route: str


@dataclass(frozen=True)
class MeanLandsbergValue:
    J: np.ndarray


def _geometry(metric, x, y, lg: LocalGeometry | None, order: int = 4) -> LocalGeometry:
    if lg is not None and lg.order >= order:
        return lg
    return LocalGeometry(metric, x, y, order=order)


def _is_randers(metric) -> bool:
    return isinstance(metric, RandersMetric)


def distortion_jet(metric: RandersMetric, lg: LocalGeometry) -> Jet:
    """tau = (n+1)/2 (ln F - ln alpha - ln(1 - ||beta||^2)) as a jet in (x, y)."""
    n = metric.n
    alpha = metric.alpha(lg.xs, lg.ys)
    return (jets.log(lg.F_jet) - jets.log(alpha) - 2.0 * beta_log_norm(metric, lg.xs)) * (0.5 * (n + 1))


def cartan(metric, x, y, lg: LocalGeometry | None = None) -> TorsionData:
    lg = _geometry(metric, x, y, lg, order=3)
    n = lg.n
    dg = lg.g_jet.gradient()[..., n:]  # d g_ij / d y^k
    C = 0.5 * dg
    I = np.einsum("...jk,...ijk->...i", lg.g_inv, C)
    I_tau = distortion_jet(metric, lg).gradient()[..., n:] if _is_randers(metric) else None
    return TorsionData(C=C, I=I, I_tau=I_tau, at=lg.at)


def distortion(metric: RandersMetric, x, y, lg: LocalGeometry | None = None) -> DistortionValue:
    if lg is None:
        lg = LocalGeometry(metric, x, y, order=2)
    tau = distortion_jet(metric, lg).coeffs[..., 0]
    return DistortionValue(tau if np.ndim(tau) else float(tau), "randers_closed_form")


def indicatrix_volume(metric, x, tol: float = 1e-9, nodes: int = 96) -> float:
    """Euclidean volume of {y : F(x, y) < 1} at a single point x."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    xs = [float(v) for v in x]
    if n == 2:

        def integrand(t):
            r = 1.0 / float(metric.F(xs, [math.cos(t), math.sin(t)]))
            return 0.5 * r * r

        area, _ = integrate.quad(integrand, 0.0, 2.0 * math.pi, epsabs=tol, epsrel=0.0, limit=200)
        return area
    if n == 3:
        u, wu = np.polynomial.legendre.leggauss(nodes)
        p, wp = np.polynomial.legendre.leggauss(2 * nodes)
        phi = math.pi * (p + 1.0)
        wphi = math.pi * wp
        U, P = np.meshgrid(u, phi, indexing="ij")
        st = np.sqrt(1.0 - U * U)
        dirs = [st * np.cos(P), st * np.sin(P), U]
        xb = [np.full_like(U, v) for v in xs]
        r = 1.0 / np.asarray(metric.F(xb, dirs), dtype=float)
        return float(np.einsum("i,j,ij->", wu, wphi, r**3) / 3.0)
    raise UnsupportedConfigurationError(f"indicatrix quadrature supports n = 2 or 3, got n = {n}")


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def distortion_quadrature(metric, x, y) -> DistortionValue:
    """tau = ln( sqrt(det g) Vol(indicatrix) / Vol(B^n) ), one state or a batch."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if n not in (2, 3):
        raise UnsupportedConfigurationError(f"indicatrix quadrature supports n = 2 or 3, got n = {n}")
    lg = LocalGeometry(metric, x, y, order=2)
    det = np.linalg.det(lg.g)
    flat = lg.x.reshape(-1, n)
    vol = np.array([indicatrix_volume(metric, p) for p in flat]).reshape(lg.x.shape[:-1])
    tau = np.log(np.sqrt(det) * vol / unit_ball_volume(n))
    return DistortionValue(tau if np.ndim(tau) else float(tau), "indicatrix_quadrature")


def _s_tau_jet(metric: RandersMetric, lg: LocalGeometry) -> Jet:
    """S = y^m dtau/dx^m - 2 G^m dtau/dy^m, one order below the spray jet."""
    n = lg.n
    tau = distortion_jet(metric, lg)
    G = lg.spray_jet
    o = G.order
    S = 0.0
    for m in range(n):
        S = S + lg.ys[m].truncate(o) * tau.derivative(m).truncate(o)
        S = S - 2.0 * G[..., m] * tau.derivative(n + m).truncate(o)
    return S


def s_curvature_tau(metric: RandersMetric, x, y, lg: LocalGeometry | None = None) -> SCurvatureValue:
    lg = _geometry(metric, x, y, lg, order=3)
    S = _s_tau_jet(metric, lg).coeffs[..., 0]
    return SCurvatureValue(S if np.ndim(S) else float(S), "tau_horizontal_derivative")


def s_curvature_randers_value(metric: RandersMetric, x, y) -> SCurvatureValue:
    return SCurvatureValue(s_curvature_randers(metric, x, y), "randers_formula")


def mean_cartan_jet(lg: LocalGeometry) -> Jet:
    """I_i = 1/2 g^{jk} dg_jk/dy^i, as a jet one order below g."""
    n = lg.n
    dg = jets.stack([lg.g_jet.derivative(n + i) for i in range(n)], axis=-1)  # [j, k, i]
    o = dg.order
    ginv = lg.g_inv_jet.truncate(o)
    return jets.einsum("...jk,...jki->...i", ginv, dg) * 0.5


def mean_landsberg(metric, x, y, lg: LocalGeometry | None = None) -> MeanLandsbergValue:
    """J_i = y^m dI_i/dx^m - I_m N^m_i - 2 G^m dI_i/dy^m."""
    lg = _geometry(metric, x, y, lg, order=4)
    n = lg.n
    I = mean_cartan_jet(lg)
    grad = I.gradient()  # [i, var]
    Ix, Iy = grad[..., :n], grad[..., n:]
    I0 = I.coeffs[..., 0]
    J = (
        np.einsum("...m,...im->...i", lg.y, Ix)
        - np.einsum("...m,...mi->...i", I0, lg.N)
        - 2.0 * np.einsum("...m,...im->...i", lg.G, Iy)
    )
    return MeanLandsbergValue(J)


def horizontal_derivative(field, metric, x, y, lg: LocalGeometry | None = None) -> np.ndarray:
    """f_{|l} = df/dx^l - N^m_l df/dy^m for a scalar field on TM minus the zero section."""
    lg = _geometry(metric, x, y, lg, order=3)
    n = lg.n
    f = field(lg.xs, lg.ys) if not isinstance(field, Jet) else field
    if not isinstance(f, Jet):
        return np.zeros(lg.x.shape)
    grad = f.gradient()
    return grad[..., :n] - np.einsum("...ml,...m->...l", lg.N, grad[..., n:])


def ricci_identity_residual(metric: RandersMetric, x, y, lg: LocalGeometry | None = None) -> np.ndarray:
    """max_l |dS/dy^l - tau_{|l} - J_l| with S from the distortion route."""
    lg = _geometry(metric, x, y, lg, order=4)
    n = lg.n
    S = _s_tau_jet(metric, lg)
    dS = S.gradient()[..., n:]
    tau_h = horizontal_derivative(distortion_jet(metric, lg), metric, x, y, lg)
    J = mean_landsberg(metric, x, y, lg).J
    return np.max(np.abs(dS - tau_h - J), axis=-1)
