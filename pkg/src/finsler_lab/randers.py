"""Covariant calculus of Randers data with respect to alpha.

Christoffel symbols of alpha, the covariant derivatives b_{i|j} and
b_{i|j|k}, the derived tensors r, s, e, the Randers S-curvature formula
and the residuals of the curvature and PDE identities satisfied by the
classified families. All x-derivatives come from n-variable jets of
a_ij(x), b_i(x) and c(x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .catalog import CatalogEntry, RandersMetric, RiemannianMetric, coords
from .errors import NotApplicableError, PositivityViolationError, SingularCaseError
from .jets import Jet

SINGULAR_BAND = 1e-8


@dataclass(frozen=True)
class CovariantData:
    x: np.ndarray
    a: np.ndarray
    a_inv: np.ndarray
    b: np.ndarray
    Gamma: np.ndarray  # Gamma[..., k, i, j] = Gamma^k_ij
    b_cov1: np.ndarray  # b_{i|j}
    b_cov2: np.ndarray  # b_{i|j|k}
    r: np.ndarray
    s: np.ndarray
    s_vec: np.ndarray  # s_j
    e: np.ndarray
    rho_i: np.ndarray  # gradient of ln sqrt(1 - ||beta||^2)


@dataclass(frozen=True)
class PhiPsi:
    Phi: np.ndarray
    Psi: np.ndarray


def _x_seeds(x, order: int) -> list[Jet]:
    x = np.asarray(x, dtype=float)
    return jets.seed_vars(x, order)


def _matrix_jet(alpha: RiemannianMetric, X: list[Jet]) -> Jet:
    return jets.as_jet_array(alpha.matrix(X), X[0])


def gamma_jet(a: Jet) -> Jet:
    """Levi-Civita symbols Gamma^k_ij as a jet one order below the jet of a_ij."""
    n = a.shape[-1]
    # D[p, q, r] = d a_pq / dx^r
    D = jets.stack([a.derivative(r) for r in range(n)], axis=-1)
    # T[l, i, j] = d_i a_lj + d_j a_li - d_l a_ij
    T = D.swapaxes(-1, -2) + D - D.moveaxis(-1, -3)
    return jets.einsum("...kl,...lij->...kij", jets.inverse(a), T) * 0.5


def christoffel(alpha: RiemannianMetric, x) -> np.ndarray:
    """Gamma[..., k, i, j] = Gamma^k_ij of alpha at x."""
    X = _x_seeds(x, 1)
    return gamma_jet(_matrix_jet(alpha, X)).coeffs[..., 0]


def beta_norm_squared_jet(metric: RandersMetric, X: list[Jet]) -> Jet:
    """||beta||^2_alpha = a^{ij} b_i b_j as a jet in the variables of X."""
    a_inv = jets.inverse(_matrix_jet(metric.alpha, X))
    b = jets.as_jet_array(metric.beta.components(X), X[0])
    return jets.einsum("...i,...i->...", b, jets.einsum("...ij,...j->...i", a_inv, b))


def beta_log_norm(metric: RandersMetric, X: list[Jet]) -> Jet:
    """ln sqrt(1 - ||beta||^2_alpha); raises once ||beta|| reaches 1."""
    nb2 = beta_norm_squared_jet(metric, X)
    if np.any(nb2.coeffs[..., 0] >= 1.0):
        raise PositivityViolationError(f"||beta||_alpha^2 = {np.max(nb2.coeffs[..., 0]):.6g} >= 1")
    return jets.log(1.0 - nb2) * 0.5


def _check(metric: RandersMetric, x):
    x = np.asarray(x, dtype=float)
    metric.check_domain(x)
    return x


def covariant_derivatives(metric: RandersMetric, x) -> CovariantData:
    x = _check(metric, x)
    X = _x_seeds(x, 2)
    a = _matrix_jet(metric.alpha, X)
    a_inv = jets.inverse(a)
    gam = gamma_jet(a)
    b = jets.as_jet_array(metric.beta.components(X), X[0])
    n = metric.n

    db = jets.stack([b.derivative(j) for j in range(n)], axis=-1)
    cov1 = db - jets.einsum("...k,...kij->...ij", b, gam)
    d_cov1 = np.stack([cov1.derivative(k).coeffs[..., 0] for k in range(n)], axis=-1)

    G0 = gam.coeffs[..., 0]
    B1 = cov1.coeffs[..., 0]
    B2 = (
        d_cov1
        - np.einsum("...mj,...mik->...ijk", B1, G0)
        - np.einsum("...im,...mjk->...ijk", B1, G0)
    )

    r = 0.5 * (B1 + np.swapaxes(B1, -1, -2))
    s = 0.5 * (B1 - np.swapaxes(B1, -1, -2))
    ainv0 = a_inv.coeffs[..., 0]
    b0 = b.coeffs[..., 0]
    s_up = np.einsum("...ih,...hj->...ij", ainv0, s)
    s_vec = np.einsum("...i,...ij->...j", b0, s_up)
    e = r + b0[..., :, None] * s_vec[..., None, :] + b0[..., None, :] * s_vec[..., :, None]

    rho = beta_log_norm(metric, X)

    return CovariantData(
        x=x,
        a=a.coeffs[..., 0],
        a_inv=ainv0,
        b=b0,
        Gamma=G0,
        b_cov1=B1,
        b_cov2=B2,
        r=r,
        s=s,
        s_vec=s_vec,
        e=e,
        rho_i=rho.gradient(),
    )


def phi_psi(cov: CovariantData, y) -> PhiPsi:
    y = np.asarray(y, dtype=float)
    Phi = np.einsum("...ij,...i,...j->...", cov.b_cov1, y, y)
    Psi = np.einsum("...ijk,...i,...j,...k->...", cov.b_cov2, y, y, y)
    return PhiPsi(Phi, Psi)


def _plain(metric_fn, x, y):
    return np.asarray(metric_fn(coords(x), coords(y)), dtype=float)


def s_curvature_randers(metric: RandersMetric, x, y, cov: CovariantData | None = None):
    """S = (n+1) { e_00 / (2F) - (s_0 + rho_0) }."""
    x = _check(metric, x)
    y = np.asarray(y, dtype=float)
    cov = cov or covariant_derivatives(metric, x)
    n = metric.n
    F = _plain(metric.F, x, y)
    e00 = np.einsum("...ij,...i,...j->...", cov.e, y, y)
    s0 = np.einsum("...i,...i->...", cov.s_vec, y)
    rho0 = np.einsum("...i,...i->...", cov.rho_i, y)
    S = (n + 1) * (e00 / (2.0 * F) - (s0 + rho0))
    return S if np.ndim(S) else float(S)


def _c_jet(entry: CatalogEntry, X: list[Jet]) -> Jet:
    c = entry.c_ref(X)
    if not isinstance(c, Jet):
        c = Jet.constant(np.broadcast_to(c, X[0].shape), X[0].layout)
    return c


def _rel(diff: np.ndarray, scale: np.ndarray, axes) -> np.ndarray:
    return np.max(np.abs(diff), axis=axes) / (1.0 + np.max(np.abs(scale), axis=axes))


def isotropy_equation_residual(entry: CatalogEntry, x) -> np.ndarray:
    """max |e_ij - 2c (a_ij - b_i b_j)|, relative, at each x."""
    if entry.c_ref is None:
        raise NotApplicableError("no reference c(x) attached to this metric")
    cov = covariant_derivatives(entry.metric, x)
    c = np.asarray(entry.c_ref(coords(cov.x)), dtype=float)
    rhs = 2.0 * c[..., None, None] * (cov.a - cov.b[..., :, None] * cov.b[..., None, :])
    return _rel(cov.e - rhs, rhs, (-2, -1))


def _require_mu(metric: RandersMetric) -> int:
    mu = metric.alpha.mu
    if mu is None:
        raise NotApplicableError("alpha carries no declared constant curvature mu")
    return mu


def ric1_residual(metric: RandersMetric, x, y) -> np.ndarray:
    """|K F^2 - mu alpha^2 - 3 (Phi/2F)^2 + Psi/(2F)| / (1 + |K| F^2)."""
    from .geometry import LocalGeometry

    mu = _require_mu(metric)
    if not metric.beta.closed:
        raise NotApplicableError("the curvature equation needs a closed one-form")
    lg = LocalGeometry(metric, x, y, order=4)
    K = lg.scalar_curvature.K_scalar
    cov = covariant_derivatives(metric, lg.x)
    pp = phi_psi(cov, lg.y)
    F = lg.F
    al2 = np.asarray(metric.alpha.quadratic(coords(lg.x), coords(lg.y)), dtype=float)
    lhs = K * F**2
    rhs = mu * al2 + 3.0 * (pp.Phi / (2.0 * F)) ** 2 - pp.Psi / (2.0 * F)
    return np.abs(lhs - rhs) / (1.0 + np.abs(K) * F**2)


def _c_data(entry: CatalogEntry, x):
    """c, its gradient c_i and covariant Hessian c_{i|j}, plus alpha data."""
    x = _check(entry.metric, x)
    X = _x_seeds(x, 2)
    a = _matrix_jet(entry.metric.alpha, X)
    gam = gamma_jet(a).coeffs[..., 0]
    c = _c_jet(entry, X)
    ci = c.gradient()
    cij = c.hessian() - np.einsum("...k,...kij->...ij", ci, gam)
    return x, c.coeffs[..., 0], ci, cij, a.coeffs[..., 0], gam


def c_equation_residual(entry: CatalogEntry, x) -> np.ndarray:
    """Residual of c_{i|j} = -c (mu + 4c^2) a_ij + 12 c c_i c_j / (mu + 4c^2)."""
    mu = _require_mu(entry.metric)
    x, c, ci, cij, a, _ = _c_data(entry, x)
    m = mu + 4.0 * c**2
    if np.any(np.abs(m) < SINGULAR_BAND):
        raise SingularCaseError("mu + 4c^2 vanishes: constant-curvature family, no c-equation")
    m = m[..., None, None]
    c = c[..., None, None]
    rhs = -c * m * a + 12.0 * c * ci[..., :, None] * ci[..., None, :] / m
    return _rel(cij - rhs, rhs, (-2, -1))


def babb1_residual(entry: CatalogEntry, x) -> np.ndarray:
    """Residual of b_i = -2 c_i / (mu + 4c^2)."""
    mu = _require_mu(entry.metric)
    x, c, ci, _, _, _ = _c_data(entry, x)
    m = mu + 4.0 * c**2
    if np.any(np.abs(m) < SINGULAR_BAND):
        raise SingularCaseError("mu + 4c^2 vanishes: b is not determined by c")
    pred = -2.0 * ci / m[..., None]
    b = entry.metric.beta.array(x)
    return np.max(np.abs(b - pred), axis=-1) / (1.0 + np.max(np.abs(pred), axis=-1))


def _potential_jet(entry: CatalogEntry, X: list[Jet], mu: int) -> Jet:
    """f = 2c / sqrt(+-(mu + 4c^2)) for mu != 0, f = 1/c^2 for mu = 0."""
    c = _c_jet(entry, X)
    if mu == 0:
        return 1.0 / (c * c)
    m = mu + 4.0 * c * c
    sgn = np.sign(m.coeffs[..., 0])
    if np.any(sgn == 0) or np.any(sgn != sgn.flat[0]):
        raise SingularCaseError("mu + 4c^2 changes sign or vanishes on the sample")
    return 2.0 * c / jets.sqrt(m * float(sgn.flat[0]))


def potential_hessian_residual(entry: CatalogEntry, x) -> np.ndarray:
    """Residual of f_{|i|j} = -mu f a_ij (mu != 0) or f_{|i|j} = 8 a_ij (mu = 0)."""
    mu = _require_mu(entry.metric)
    x = _check(entry.metric, x)
    X = _x_seeds(x, 2)
    a = _matrix_jet(entry.metric.alpha, X)
    gam = gamma_jet(a).coeffs[..., 0]
    f = _potential_jet(entry, X, mu)
    fij = f.hessian() - np.einsum("...k,...kij->...ij", f.gradient(), gam)
    a0 = a.coeffs[..., 0]
    rhs = 8.0 * a0 if mu == 0 else -mu * f.coeffs[..., 0][..., None, None] * a0
    return _rel(fij - rhs, rhs, (-2, -1))


def sphere_potential(entry: CatalogEntry, x):
    """f = 2c / sqrt(1 + 4c^2) for a mu = +1 entry, with its gradient."""
    if entry.mu != 1:
        raise NotApplicableError("the sphere potential is defined for mu = +1 entries")
    x = _check(entry.metric, x)
    X = _x_seeds(x, 1)
    f = _potential_jet(entry, X, 1)
    return f.coeffs[..., 0], f.gradient()


def delta(entry: CatalogEntry, x) -> np.ndarray:
    """delta(x) = sqrt(|grad f|^2_alpha + f^2) for f = 2c / sqrt(1 + 4c^2)."""
    x = np.asarray(x, dtype=float)
    f, df = sphere_potential(entry, x)
    a_inv = jets.checked_inverse(entry.metric.alpha.matrix_array(x))
    return np.sqrt(np.einsum("...i,...ij,...j->...", df, a_inv, df) + f**2)


def curvature_bounds(delta_value):
    """(2 - d) / (2 (1 + d)) <= K <= (2 + d) / (2 (1 - d))."""
    d = np.asarray(delta_value, dtype=float)
    return (2.0 - d) / (2.0 * (1.0 + d)), (2.0 + d) / (2.0 * (1.0 - d))


def potential_h(entry: CatalogEntry, x):
    """h(x) = arctan(2 c(x)); beta = -dh for the mu = +1 family."""
    return jets.atan(2.0 * np.asarray(entry.c_ref(coords(x)), dtype=float))
