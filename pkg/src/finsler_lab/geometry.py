"""Fundamental tensor, spray, Riemann curvature and flag curvature.

Everything is assembled from one jet of F^2 in the 2n variables (x, y):
second y-derivatives give g_ij, a jet-level inverse gives g^ij, and the
spray coefficients come out as a jet two orders below F^2, so the
Riemann curvature only needs F^2 to order 4.

All functions accept a single state (x, y of shape (n,)) or a batch
(shape (..., n)); results carry the same leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import jets
from .errors import DegenerateFlagError, DegenerateMetricError, DomainError
from .jets import Jet

SCALAR_CURVATURE_TOL = 1e-6


@dataclass(frozen=True)
class PointState:
    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return np.shape(self.x)[-1]


@dataclass(frozen=True)
class FundamentalTensor:
    g: np.ndarray
    g_inv: np.ndarray
    at: PointState


@dataclass(frozen=True)
class SprayData:
    G: np.ndarray
    N: np.ndarray
    at: PointState


@dataclass(frozen=True)
class RiemannTensor:
    K: np.ndarray  # K[..., i, k] = K^i_k
    at: PointState


@dataclass(frozen=True)
class FlagCurvatureValue:
    K_scalar: np.ndarray
    residual: np.ndarray

    @property
    def of_scalar_curvature(self):
        return self.residual <= SCALAR_CURVATURE_TOL


@dataclass(frozen=True)
class CurvatureReport:
    at: PointState
    F: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    G: np.ndarray
    N: np.ndarray
    K_tensor: np.ndarray
    K_scalar: np.ndarray
    residual: np.ndarray


def _prepare(metric, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != metric.n or y.shape[-1] != metric.n:
        raise ValueError(f"state dimension does not match metric dimension n = {metric.n}")
    x, y = np.broadcast_arrays(x, y)
    if np.any(np.all(y == 0.0, axis=-1)):
        raise DomainError("direction y must be nonzero")
    check = getattr(metric, "check_domain", None)
    if check is not None:
        check(x)
    return x, y


class LocalGeometry:
    """Jet bundle of one metric at one (batch of) state(s).

    ``order`` is the order of the F^2 jet; the spray is available to order
    ``order - 2``, so order 4 is needed for curvature and mean Landsberg.
    """

    def __init__(self, metric, x, y, order: int = 4):
        self.metric = metric
        self.x, self.y = _prepare(metric, x, y)
        self.n = n = metric.n
        self.order = order
        self.seeds = jets.seed(self.x, self.y, order)
        self.xs, self.ys = self.seeds[:n], self.seeds[n:]
        F = metric.F(self.xs, self.ys)
        if not isinstance(F, Jet):
            F = Jet.constant(np.broadcast_to(F, self.x.shape[:-1]), self.seeds[0].layout)
        self.F_jet = F
        self.F2 = F * F
        P = self.F2
        self.Py = [P.derivative(n + i) for i in range(n)]
        self.g_jet = jets.stack(
            [jets.stack([self.Py[i].derivative(n + j) for j in range(n)], axis=-1) for i in range(n)],
            axis=-2,
        ) * 0.5
        g0 = self.g_jet.coeffs[..., 0]
        if np.any(np.linalg.eigvalsh(g0)[..., 0] <= 0):
            raise DegenerateMetricError("fundamental tensor is not positive definite")
        self.g_inv_jet = jets.inverse(self.g_jet)

    @property
    def at(self) -> PointState:
        return PointState(self.x, self.y)

    @property
    def F(self) -> np.ndarray:
        return self.F_jet.coeffs[..., 0]

    @property
    def g(self) -> np.ndarray:
        return self.g_jet.coeffs[..., 0]

    @property
    def g_inv(self) -> np.ndarray:
        return self.g_inv_jet.coeffs[..., 0]

    @cached_property
    def spray_jet(self) -> Jet:
        n, P = self.n, self.F2
        Px = jets.stack([P.derivative(k) for k in range(n)], axis=-1)
        Pxy = jets.stack(
            [jets.stack([self.Py[l].derivative(k) for l in range(n)], axis=-1) for k in range(n)],
            axis=-2,
        )
        Y = jets.stack(self.ys, axis=-1)
        v = jets.einsum("...kl,...k->...l", Pxy, Y) - Px
        return jets.einsum("...il,...l->...i", self.g_inv_jet, v) * 0.25

    @property
    def G(self) -> np.ndarray:
        return self.spray_jet.coeffs[..., 0]

    @cached_property
    def N(self) -> np.ndarray:
        return self.spray_jet.gradient()[..., self.n :]

    @cached_property
    def K_tensor(self) -> np.ndarray:
        n = self.n
        Gj = self.spray_jet
        grad = Gj.gradient()
        hess = Gj.hessian()
        Gx = grad[..., :n]
        N = grad[..., n:]
        Gxy = hess[..., :n, n:]
        Gyy = hess[..., n:, n:]
        y, G = self.y, Gj.coeffs[..., 0]
        return (
            2.0 * Gx
            - np.einsum("...j,...ijk->...ik", y, Gxy)
            + 2.0 * np.einsum("...j,...ijk->...ik", G, Gyy)
            - np.einsum("...ij,...jk->...ik", N, N)
        )

    @cached_property
    def y_lower(self) -> np.ndarray:
        return np.einsum("...kt,...t->...k", self.g, self.y)

    @cached_property
    def h_mixed(self) -> np.ndarray:
        """h^i_k = delta^i_k - y^i y_k / F^2."""
        n = self.n
        F2 = self.F[..., None, None] ** 2
        return np.eye(n) - self.y[..., :, None] * self.y_lower[..., None, :] / F2

    @cached_property
    def h_lower(self) -> np.ndarray:
        F2 = self.F[..., None, None] ** 2
        return self.g - self.y_lower[..., :, None] * self.y_lower[..., None, :] / F2

    @cached_property
    def scalar_curvature(self) -> FlagCurvatureValue:
        K = self.K_tensor
        F2 = self.F**2
        trace = np.trace(K, axis1=-2, axis2=-1)
        Ks = trace / ((self.n - 1) * F2)
        model = Ks[..., None, None] * F2[..., None, None] * self.h_mixed
        resid = np.max(np.abs(K - model), axis=(-2, -1)) / (1.0 + np.abs(Ks) * F2)
        return FlagCurvatureValue(Ks, resid)


def local_geometry(metric, x, y, order: int = 4) -> LocalGeometry:
    return LocalGeometry(metric, x, y, order)


def fundamental_tensor(metric, x, y) -> FundamentalTensor:
    lg = LocalGeometry(metric, x, y, order=2)
    return FundamentalTensor(lg.g, lg.g_inv, lg.at)


def spray(metric, x, y) -> SprayData:
    lg = LocalGeometry(metric, x, y, order=3)
    return SprayData(lg.G, lg.N, lg.at)


def spray_coefficients(metric, x, y) -> np.ndarray:
    """G^i only; the cheapest call, used by the geodesic integrator."""
    return LocalGeometry(metric, x, y, order=2).G


def riemann(metric, x, y) -> RiemannTensor:
    lg = LocalGeometry(metric, x, y, order=4)
    return RiemannTensor(lg.K_tensor, lg.at)


def flag_curvature(metric, x, y, v, lg: LocalGeometry | None = None):
    """K(P, y) for the flag P = span{y, v}."""
    lg = lg or LocalGeometry(metric, x, y, order=4)
    v = np.broadcast_to(np.asarray(v, dtype=float), lg.y.shape)
    g, K, y = lg.g, lg.K_tensor, lg.y
    gyy = np.einsum("...i,...ij,...j->...", y, g, y)
    gvv = np.einsum("...i,...ij,...j->...", v, g, v)
    gyv = np.einsum("...i,...ij,...j->...", y, g, v)
    gram = gyy * gvv - gyv**2
    if np.any(gram <= 1e-12 * gyy * gvv):
        raise DegenerateFlagError("transverse edge v is parallel to the flagpole y")
    num = np.einsum("...i,...ij,...jk,...k->...", v, g, K, v)
    out = num / gram
    return out if np.ndim(out) else float(out)


def scalar_curvature(metric, x, y) -> FlagCurvatureValue:
    return LocalGeometry(metric, x, y, order=4).scalar_curvature


def curvature_report(metric, x, y) -> CurvatureReport:
    lg = LocalGeometry(metric, x, y, order=4)
    sc = lg.scalar_curvature
    return CurvatureReport(
        at=lg.at,
        F=lg.F,
        g=lg.g,
        g_inv=lg.g_inv,
        G=lg.G,
        N=lg.N,
        K_tensor=lg.K_tensor,
        K_scalar=sc.K_scalar,
        residual=sc.residual,
    )
