"""Explicit Randers and Riemannian metrics with their closed-form reference data.

Every formula here is written over generic scalars (floats, numpy arrays,
jets or mpmath numbers), so the same definition drives plain evaluation,
jet differentiation and high-precision finite differences. Coordinates are
passed as sequences ``x = (x^1, ..., x^n)`` and ``y = (y^1, ..., y^n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    OutOfDomainError,
    PositivityViolationError,
    UnsupportedConfigurationError,
)
from .jets import checked_inverse, dot, sqrt

DEFAULT_MARGIN = 1e-9

Constraint = tuple  # (description, generic value that must stay positive)


def coords(arr) -> list:
    """Split an array of shape (..., n) into its n coordinate slices."""
    arr = np.asarray(arr, dtype=float)
    return [arr[..., i] for i in range(arr.shape[-1])]


def _neg(y: Sequence) -> list:
    return [-v for v in y]


# ----------------------------------------------------------------- alpha
@dataclass(frozen=True)
class RiemannianMetric:
    """alpha = sqrt(a_ij(x) y^i y^j), optionally tagged with constant curvature mu."""

    n: int
    matrix: Callable[[Sequence], list]
    mu: Optional[int] = None
    closed_form: Optional[Callable[[Sequence, Sequence], object]] = None
    constraints: Callable[[Sequence], list] = lambda x: []
    name: str = "alpha"

    def quadratic(self, x, y):
        a = self.matrix(x)
        total = 0.0
        for i in range(self.n):
            for j in range(self.n):
                total = total + a[i][j] * y[i] * y[j]
        return total

    def __call__(self, x, y):
        if self.closed_form is not None:
            return self.closed_form(x, y)
        return sqrt(self.quadratic(x, y))

    # a Riemannian metric is a Finsler metric in its own right
    def F(self, x, y):
        return self(x, y)

    def matrix_array(self, x) -> np.ndarray:
        """a_ij at plain points x of shape (..., n), as an array (..., n, n)."""
        xs = coords(x)
        a = self.matrix(xs)
        shape = np.shape(xs[0])
        return np.stack(
            [np.stack([np.broadcast_to(np.asarray(e, float), shape) for e in row], -1) for row in a],
            -2,
        )


def _identity(n: int):
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def build_space_form(mu: int, n: int) -> RiemannianMetric:
    """Constant-curvature metric alpha_mu in projective coordinates."""
    if mu not in (-1, 0, 1):
        raise InvalidParameterError(f"mu must be -1, 0 or +1, got {mu}")
    if n < 2:
        raise UnsupportedConfigurationError(f"dimension n must be >= 2, got {n}")

    if mu == 0:
        return RiemannianMetric(
            n=n,
            matrix=lambda x: _identity(n),
            mu=0,
            closed_form=lambda x, y: sqrt(dot(y, y)),
            name="alpha_0",
        )

    s = float(mu)

    def matrix(x):
        w = 1.0 + s * dot(x, x)
        return [
            [(1.0 if i == j else 0.0) / w - s * x[i] * x[j] / (w * w) for j in range(n)]
            for i in range(n)
        ]

    def closed_form(x, y):
        xx, yy, xy = dot(x, x), dot(y, y), dot(x, y)
        return sqrt(yy + s * (xx * yy - xy * xy)) / (1.0 + s * xx)

    constraints = (lambda x: [("|x|^2 < 1", 1.0 - dot(x, x))]) if mu == -1 else (lambda x: [])
    return RiemannianMetric(
        n=n,
        matrix=matrix,
        mu=mu,
        closed_form=closed_form,
        constraints=constraints,
        name=f"alpha_{mu:+d}",
    )


# ------------------------------------------------------------------ beta
@dataclass(frozen=True)
class OneForm:
    """beta = b_i(x) y^i."""

    n: int
    components: Callable[[Sequence], list]
    closed: bool = True

    def __call__(self, x, y):
        return dot(self.components(x), y)

    def array(self, x) -> np.ndarray:
        xs = coords(x)
        shape = np.shape(xs[0])
        return np.stack([np.broadcast_to(np.asarray(e, float), shape) for e in self.components(xs)], -1)


def zero_form(n: int) -> OneForm:
    return OneForm(n=n, components=lambda x: [0.0] * n, closed=True)


@dataclass(frozen=True)
class RandersMetric:
    """F = alpha + beta, with an optional closed form for F itself."""

    alpha: RiemannianMetric
    beta: OneForm
    closed_form: Optional[Callable[[Sequence, Sequence], object]] = None
    constraints: Callable[[Sequence], list] = lambda x: []
    margin: float = DEFAULT_MARGIN

    @property
    def n(self) -> int:
        return self.alpha.n

    def F(self, x, y):
        if self.closed_form is not None:
            return self.closed_form(x, y)
        return self.assembled(x, y)

    __call__ = F

    def assembled(self, x, y):
        """alpha + beta built from a_ij and b_i, ignoring the closed form."""
        return sqrt(self.alpha.quadratic(x, y)) + self.beta(x, y)

    def all_constraints(self, x) -> list:
        return list(self.alpha.constraints(x)) + list(self.constraints(x))

    def admissible(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for _, value in self.all_constraints(coords(x)):
            ok &= np.asarray(value) > self.margin
        return ok

    def check_domain(self, x) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise UnsupportedConfigurationError(
                f"point has dimension {x.shape[-1]}, metric has n = {self.n}"
            )
        for desc, value in self.all_constraints(coords(x)):
            bad = ~(np.asarray(value) > self.margin)
            if np.any(bad):
                raise OutOfDomainError(f"point outside admissible domain: requires {desc}")


def riemannian_as_randers(alpha: RiemannianMetric) -> RandersMetric:
    return RandersMetric(alpha=alpha, beta=zero_form(alpha.n), closed_form=alpha.closed_form)


def beta_norm_squared(metric: RandersMetric, x) -> np.ndarray:
    """a^{ij} b_i b_j at plain points x of shape (..., n)."""
    a = metric.alpha.matrix_array(x)
    b = metric.beta.array(x)
    return np.einsum("...i,...ij,...j->...", b, checked_inverse(a), b)


def beta_norm(metric: RandersMetric, x):
    """||beta||_alpha(x); raises once it reaches 1."""
    metric.check_domain(x)
    nb = np.sqrt(beta_norm_squared(metric, x))
    if np.any(nb >= 1.0):
        raise PositivityViolationError(f"||beta||_alpha = {np.max(nb):.6g} >= 1")
    return nb if np.ndim(nb) else float(nb)


# --------------------------------------------------------------- catalog
@dataclass(frozen=True)
class CatalogEntry:
    """A catalog metric plus its reference closed forms."""

    family: str
    params: dict
    n: int
    sign: str
    metric: RandersMetric
    mu: Optional[int]
    c_ref: Callable
    K_ref: Optional[Callable] = None
    sigma_ref: Optional[Callable] = None
    nu_ref: Optional[Callable] = None
    beta_complement_ref: Optional[Callable] = None
    f_ref: Optional[Callable] = None
    domain_radius: Optional[float] = None
    projectively_flat: bool = True
    extras: dict = field(default_factory=dict)

    @property
    def riemannian(self) -> bool:
        return self.family == "space_form"

    @property
    def c_constant(self) -> bool:
        return self.family in ("space_form", "funk")

    def spec(self) -> dict:
        """Normalized metric specification, as written to and read from JSON."""
        params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items() if not k.startswith("_")}
        return {"family": self.family, "n": self.n, "params": params, "sign": self.sign}


FAMILIES = ("space_form", "funk", "b1", "b2", "b3", "example31", "example41", "example42")
ALIASES = {
    "euclidean": ("space_form", {"mu": 0}),
    "hyperbolic": ("space_form", {"mu": -1}),
    "sphere": ("space_form", {"mu": 1}),
    "spherical": ("space_form", {"mu": 1}),
}


def _vector(value, n: int, name: str) -> tuple:
    if value is None:
        return (0.0,) * n
    if isinstance(value, (int, float)):
        value = [value]
    v = tuple(float(t) for t in value)
    if len(v) != n:
        raise InvalidParameterError(f"parameter {name} must have n = {n} components, got {len(v)}")
    return v


def _sign_value(sign) -> float:
    if sign in ("+", "+1", 1, None):
        return 1.0
    if sign in ("-", "-1", -1):
        return -1.0
    raise InvalidParameterError(f"sign must be '+' or '-', got {sign!r}")


def _ratio(F):
    return lambda x, y: F(x, _neg(y)) / F(x, y)


def _space_form_entry(mu: int, n: int) -> CatalogEntry:
    alpha = build_space_form(mu, n)
    metric = riemannian_as_randers(alpha)
    fmu = float(mu)
    return CatalogEntry(
        family="space_form",
        params={"mu": mu},
        n=n,
        sign="+",
        metric=metric,
        mu=mu,
        c_ref=lambda x: 0.0 * x[0],
        K_ref=lambda x, y: fmu + 0.0 * x[0],
        sigma_ref=lambda x: fmu + 0.0 * x[0],
        beta_complement_ref=lambda x: 1.0 + 0.0 * x[0],
        domain_radius=1.0 if mu == -1 else None,
    )


def _funk_entry(a: tuple, s: float, n: int, sign: str) -> CatalogEntry:
    if not dot(a, a) < 1.0:
        raise InvalidParameterError(f"Funk requires |a| < 1, got |a| = {math.sqrt(dot(a, a)):.6g}")
    alpha = build_space_form(-1, n)

    def F(x, y):
        xx, yy, xy = dot(x, x), dot(y, y), dot(x, y)
        return (sqrt(yy - (xx * yy - xy * xy)) + s * xy) / (1.0 - xx) + s * dot(a, y) / (1.0 + dot(a, x))

    def b(x):
        w = 1.0 - dot(x, x)
        v = 1.0 + dot(a, x)
        return [s * (x[i] / w + a[i] / v) for i in range(n)]

    metric = RandersMetric(
        alpha=alpha,
        beta=OneForm(n, b),
        closed_form=F,
        constraints=lambda x: [("1 + <a,x> > 0", 1.0 + dot(a, x))],
    )
    c = 0.5 * s
    return CatalogEntry(
        family="funk",
        params={"a": a},
        n=n,
        sign=sign,
        metric=metric,
        mu=-1,
        c_ref=lambda x: c + 0.0 * x[0],
        K_ref=lambda x, y: -0.25 + 0.0 * x[0],
        sigma_ref=lambda x: -c * c + 0.0 * x[0],
        nu_ref=lambda x: 0.0 * x[0],
        domain_radius=1.0,
    )


def _b1_entry(lam: float, a: tuple, s: float, n: int, sign: str, family="b1", closed=None) -> CatalogEntry:
    aa = dot(a, a)
    if not aa < lam * lam + s:
        raise InvalidParameterError(
            f"B1 requires |a|^2 < lambda^2 {sign} 1, got |a|^2 = {aa:.6g}, lambda = {lam:.6g}"
        )
    alpha = build_space_form(-1, n)

    def g(x):
        return lam + dot(a, x)

    def D(x):
        return g(x) ** 2 + s * (1.0 - dot(x, x))

    def c(x):
        return g(x) / (2.0 * sqrt(D(x)))

    def b(x):
        w = 1.0 - dot(x, x)
        gx = g(x)
        den = w * sqrt(D(x))
        return [(gx * x[i] + w * a[i]) / den for i in range(n)]

    def F(x, y):
        w = 1.0 - dot(x, x)
        xx, yy, xy = dot(x, x), dot(y, y), dot(x, y)
        return sqrt(yy - (xx * yy - xy * xy)) / w + (g(x) * xy + w * dot(a, y)) / (w * sqrt(D(x)))

    F = closed or F
    ratio = _ratio(F)

    def K(x, y):
        return -0.75 * (s * (1.0 - dot(x, x))) / D(x) * ratio(x, y) - 0.25

    metric = RandersMetric(
        alpha=alpha,
        beta=OneForm(n, b),
        closed_form=F,
        constraints=lambda x: [("(lambda + <a,x>)^2 +- (1 - |x|^2) > 0", D(x))],
    )
    return CatalogEntry(
        family=family,
        params={"lambda": lam, "a": a} if family == "b1" else {"lambda": lam},
        n=n,
        sign=sign,
        metric=metric,
        mu=-1,
        c_ref=c,
        K_ref=K,
        sigma_ref=lambda x: 3.0 * c(x) ** 2 - 1.0,
        beta_complement_ref=lambda x: (1.0 - dot(x, x)) * (s - (aa - lam * lam)) / D(x),
        domain_radius=1.0,
    )


def _b2_entry(k: float, a: tuple, s: float, n: int, sign: str, family="b2", closed=None) -> CatalogEntry:
    aa = dot(a, a)
    if not k > 0:
        raise InvalidParameterError(f"B2 requires k > 0, got k = {k:.6g}")
    if not aa < k:
        raise InvalidParameterError(f"B2 requires |a|^2 < k, got |a|^2 = {aa:.6g}, k = {k:.6g}")
    alpha = build_space_form(0, n)

    def Q(x):
        return k + 2.0 * dot(a, x) + dot(x, x)

    def c(x):
        return s / (2.0 * sqrt(Q(x)))

    def b(x):
        r = sqrt(Q(x))
        return [s * (a[i] + x[i]) / r for i in range(n)]

    def F(x, y):
        return sqrt(dot(y, y)) + s * (dot(a, y) + dot(x, y)) / sqrt(Q(x))

    F = closed or F
    ratio = _ratio(F)

    def K(x, y):
        return 3.0 / (4.0 * Q(x)) * ratio(x, y)

    metric = RandersMetric(alpha=alpha, beta=OneForm(n, b), closed_form=F)
    return CatalogEntry(
        family=family,
        params={"k": k, "a": a} if family == "b2" else {},
        n=n,
        sign=sign,
        metric=metric,
        mu=0,
        c_ref=c,
        K_ref=K,
        sigma_ref=lambda x: 3.0 * c(x) ** 2,
        beta_complement_ref=lambda x: (k - aa) / Q(x),
    )


def _b3_entry(eps: float, a: tuple, n: int) -> CatalogEntry:
    aa = dot(a, a)
    if not eps * eps + aa < 1.0:
        raise InvalidParameterError(
            f"B3 requires eps^2 + |a|^2 < 1, got {eps * eps + aa:.6g}"
        )
    alpha = build_space_form(1, n)

    def g(x):
        return eps + dot(a, x)

    def E(x):
        return 1.0 + dot(x, x) - g(x) ** 2

    def c(x):
        return g(x) / (2.0 * sqrt(E(x)))

    def b(x):
        w = 1.0 + dot(x, x)
        gx = g(x)
        den = w * sqrt(E(x))
        return [(gx * x[i] - w * a[i]) / den for i in range(n)]

    def F(x, y):
        w = 1.0 + dot(x, x)
        xx, yy, xy = dot(x, x), dot(y, y), dot(x, y)
        return sqrt(yy + (xx * yy - xy * xy)) / w + (g(x) * xy - w * dot(a, y)) / (w * sqrt(E(x)))

    ratio = _ratio(F)

    def K(x, y):
        return 3.0 * (1.0 + dot(x, x)) / (4.0 * E(x)) * ratio(x, y) + 0.25

    def f(x):
        cx = c(x)
        return 2.0 * cx / sqrt(1.0 + 4.0 * cx * cx)

    metric = RandersMetric(
        alpha=alpha,
        beta=OneForm(n, b),
        closed_form=F,
        constraints=lambda x: [("1 + |x|^2 - (eps + <a,x>)^2 > 0", E(x))],
    )
    return CatalogEntry(
        family="b3",
        params={"eps": eps, "a": a},
        n=n,
        sign="+",
        metric=metric,
        mu=1,
        c_ref=c,
        K_ref=K,
        sigma_ref=lambda x: 3.0 * c(x) ** 2 + 1.0,
        beta_complement_ref=lambda x: (1.0 + dot(x, x)) * (1.0 - eps * eps - aa) / E(x),
        f_ref=f,
    )


def _example31_entry(eps: float, n: int) -> CatalogEntry:
    if n != 2:
        raise UnsupportedConfigurationError("example31 is a two-dimensional metric (n = 2)")
    if not 0.0 < eps <= 1.0:
        raise InvalidParameterError(f"example31 requires 0 < eps <= 1, got eps = {eps:.6g}")
    q = math.sqrt(1.0 - eps * eps)

    def r2(x):
        return x[0] * x[0] + x[1] * x[1]

    def matrix(x):
        w = 1.0 + eps * r2(x)
        return [
            [((1.0 - eps * eps) * x[i] * x[j] + (eps * w if i == j else 0.0)) / (w * w) for j in range(2)]
            for i in range(2)
        ]

    def alpha_closed(x, y):
        w = 1.0 + eps * r2(x)
        xu = x[0] * y[0] + x[1] * y[1]
        return sqrt((1.0 - eps * eps) * xu * xu + eps * (y[0] * y[0] + y[1] * y[1]) * w) / w

    def b(x):
        w = 1.0 + eps * r2(x)
        return [q * x[0] / w, q * x[1] / w]

    alpha = RiemannianMetric(n=2, matrix=matrix, mu=None, closed_form=alpha_closed, name="alpha_ex31")

    def F(x, y):
        w = 1.0 + eps * r2(x)
        return alpha_closed(x, y) + q * (x[0] * y[0] + x[1] * y[1]) / w

    def c(x):
        return q / (2.0 * (eps + r2(x)))

    def K(x, y):
        # Gauss curvature in the sigma + 3 dc(y)/F arrangement
        m = eps + r2(x)
        xu = x[0] * y[0] + x[1] * y[1]
        return -3.0 * q * xu / (m * m * F(x, y)) + (7.0 * (1.0 - eps * eps) + 8.0 * eps * m) / (4.0 * m * m)

    def K_first_display(x, y):
        # an alternative reference display, kept to document its inconsistent denominator
        w = 1.0 + eps * r2(x)
        m = eps + r2(x)
        xu = x[0] * y[0] + x[1] * y[1]
        root = sqrt((1.0 - eps * eps) * xu * xu + eps * (y[0] * y[0] + y[1] * y[1]) * w)
        return -3.0 * q * xu / w / (root + q * xu) + (7.0 * (1.0 - eps * eps) + 8.0 * eps * m) / (4.0 * m * m)

    def K_nu_form(x, y):
        m = eps + r2(x)
        w = 1.0 + eps * r2(x)
        return -(5.0 - eps * eps + 4.0 * eps * r2(x)) / (4.0 * m * m) + 3.0 * w * alpha_closed(x, y) / (m * m * F(x, y))

    metric = RandersMetric(alpha=alpha, beta=OneForm(2, b), closed_form=F)
    return CatalogEntry(
        family="example31",
        params={"eps": eps},
        n=2,
        sign="+",
        metric=metric,
        mu=None,
        c_ref=c,
        K_ref=K,
        sigma_ref=lambda x: 7.0 * (1.0 - eps * eps) / (4.0 * (eps + r2(x)) ** 2) + 2.0 * eps / (eps + r2(x)),
        nu_ref=lambda x: 3.0 / (eps * (eps + r2(x))),
        beta_complement_ref=lambda x: eps * (1.0 + eps * r2(x)) / (eps + r2(x)),
        projectively_flat=False,
        extras={"K_first_display": K_first_display, "K_nu_form": K_nu_form},
    )


def _example41_entry(lam: float, n: int) -> CatalogEntry:
    def F(x, y):
        w = 1.0 - dot(x, x)
        root = sqrt(w + lam * lam)
        return (sqrt(w * dot(y, y) + dot(x, y) ** 2) * root + lam * dot(x, y)) / (w * root)

    return _b1_entry(lam, (0.0,) * n, 1.0, n, "+", family="example41", closed=F)


def _example42_entry(n: int) -> CatalogEntry:
    def F(x, y):
        w = sqrt(1.0 + dot(x, x))
        return (sqrt(dot(y, y)) * w + dot(x, y)) / w

    return _b2_entry(1.0, (0.0,) * n, 1.0, n, "+", family="example42", closed=F)


def build_catalog_entry(family: str, params: Optional[dict] = None, n: Optional[int] = None, sign="+") -> CatalogEntry:
    """Construct a catalog metric after validating its parameter inequalities."""
    params = dict(params or {})
    family = family.lower()
    if family in ALIASES:
        family, preset = ALIASES[family]
        params = {**preset, **params}
    if family not in FAMILIES:
        raise InvalidParameterError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
    if "a" in params and params["a"] is not None and n is None:
        n = len(params["a"]) if not isinstance(params["a"], (int, float)) else 1
    n = 2 if n is None else int(n)
    if n < 2:
        raise UnsupportedConfigurationError(f"dimension n must be >= 2, got {n}")
    s = _sign_value(sign)
    sign = "+" if s > 0 else "-"

    if family == "space_form":
        mu = int(params.get("mu", 0))
        if mu not in (-1, 0, 1):
            raise InvalidParameterError(f"mu must be -1, 0 or +1, got {mu}")
        return _space_form_entry(mu, n)
    if family == "funk":
        return _funk_entry(_vector(params.get("a"), n, "a"), s, n, sign)
    if family == "b1":
        lam = float(params.get("lambda", params.get("lam", 0.0)))
        return _b1_entry(lam, _vector(params.get("a"), n, "a"), s, n, sign)
    if family == "b2":
        k = float(params.get("k", 1.0))
        return _b2_entry(k, _vector(params.get("a"), n, "a"), s, n, sign)
    if family == "b3":
        eps = float(params.get("eps", 0.0))
        return _b3_entry(eps, _vector(params.get("a"), n, "a"), n)
    if family == "example31":
        return _example31_entry(float(params.get("eps", 0.5)), n)
    if family == "example41":
        return _example41_entry(float(params.get("lambda", params.get("lam", 1.0))), n)
    return _example42_entry(n)


def entry_from_spec(spec: dict) -> CatalogEntry:
    """Build an entry from the JSON metric-specification schema."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise InvalidParameterError("metric specification needs a 'family' field")
    params = spec.get("params") or {}
    if not isinstance(params, dict):
        raise InvalidParameterError("'params' must be an object")
    return build_catalog_entry(spec["family"], params, spec.get("n"), spec.get("sign", "+"))
