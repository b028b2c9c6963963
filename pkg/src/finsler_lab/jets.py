"""Truncated multivariate Taylor jets.

A :class:`Jet` stores the Taylor polynomial of a scalar (or of an array of
scalars) in ``nvars`` variables, truncated at total degree ``order <= 4``.
Coefficients are kept densely in a graded layout, so truncating to a lower
order is a prefix slice. Every jet may carry leading array axes; arithmetic
broadcasts over them exactly like numpy, which lets a single jet evaluation
cover a whole batch of sample states.

Metric formulas are written against the generic helpers :func:`sqrt`,
:func:`log`, :func:`exp` and :func:`atan`, which dispatch on jets, floats,
numpy arrays and mpmath numbers alike.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateMetricError,
    DomainError,
    OrderExceededError,
    UnsupportedConfigurationError,
)

MAX_ORDER = 4
COND_LIMIT = 1e12


class Layout:
    """Monomial bookkeeping for jets in ``nvars`` variables up to ``order``."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        monos = []
        sizes = []
        for d in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), d):
                e = [0] * nvars
                for v in combo:
                    e[v] += 1
                monos.append(tuple(e))
            sizes.append(len(monos))
        self.monomials = monos
        self.sizes = sizes
        self.size = len(monos)
        self.index = {m: i for i, m in enumerate(monos)}
        self.degree = np.array([sum(m) for m in monos], dtype=int)
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in m) for m in monos], dtype=float
        )

        # product table, sorted by target so reduceat can scatter
        rows = []
        for i, mi in enumerate(monos):
            limit = sizes[order - sum(mi)]
            for j in range(limit):
                mj = monos[j]
                k = self.index[tuple(p + q for p, q in zip(mi, mj))]
                rows.append((k, i, j))
        rows.sort()
        table = np.array(rows, dtype=np.intp)
        self.mul_k = table[:, 0]
        self.mul_i = table[:, 1]
        self.mul_j = table[:, 2]
        self.mul_starts = np.flatnonzero(np.r_[True, np.diff(self.mul_k) != 0])

        self._deriv = {}
        if order >= 2:
            hidx = np.zeros((nvars, nvars), dtype=np.intp)
            hfac = np.ones((nvars, nvars))
            for a in range(nvars):
                for b in range(nvars):
                    e = [0] * nvars
                    e[a] += 1
                    e[b] += 1
                    hidx[a, b] = self.index[tuple(e)]
                    if a == b:
                        hfac[a, b] = 2.0
            self.hess_index, self.hess_factor = hidx, hfac

    def derivative_table(self, var: int):
        """Source indices and factors mapping this layout to d/d(var), one order lower."""
        if var not in self._deriv:
            lower = self.sizes[self.order - 1]
            src = np.empty(lower, dtype=np.intp)
            fac = np.empty(lower)
            for t in range(lower):
                m = list(self.monomials[t])
                fac[t] = m[var] + 1
                m[var] += 1
                src[t] = self.index[tuple(m)]
            self._deriv[var] = (src, fac)
        return self._deriv[var]


@functools.lru_cache(maxsize=None)
def layout(nvars: int, order: int) -> Layout:
    if not 0 <= order <= MAX_ORDER:
        raise UnsupportedConfigurationError(
            f"jet order must lie in [0, {MAX_ORDER}], got {order}"
        )
    if nvars < 1:
        raise UnsupportedConfigurationError("a jet needs at least one variable")
    return Layout(nvars, order)


def _mul(ac: np.ndarray, bc: np.ndarray, lay: Layout) -> np.ndarray:
    prod = ac[..., lay.mul_i] * bc[..., lay.mul_j]
    return np.add.reduceat(prod, lay.mul_starts, axis=-1)


def _const_coeffs(value, lay: Layout) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    c = np.zeros(value.shape + (lay.size,))
    c[..., 0] = value
    return c


def _horner(coefs: Sequence, uc: np.ndarray, lay: Layout) -> np.ndarray:
    """Evaluate sum_k coefs[k] * u**k for a jet u with zero constant term."""
    out = _const_coeffs(coefs[-1], lay)
    for ck in reversed(coefs[:-1]):
        out = _mul(uc, out, lay)
        out[..., 0] = out[..., 0] + ck
    return out


class Jet:
    """Truncated Taylor polynomial, possibly array-valued over leading axes."""

    __slots__ = ("coeffs", "layout")
    __array_priority__ = 1000

    def __init__(self, coeffs: np.ndarray, lay: Layout):
        self.coeffs = coeffs
        self.layout = lay

    # ---------------------------------------------------------------- basics
    @property
    def nvars(self) -> int:
        return self.layout.nvars

    num_vars = nvars

    @property
    def order(self) -> int:
        return self.layout.order

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        """The constant term, i.e. the represented function at the expansion point."""
        v = self.coeffs[..., 0]
        return v if v.ndim else float(v)

    @classmethod
    def constant(cls, value, lay: Layout) -> "Jet":
        return cls(_const_coeffs(value, lay), lay)

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, shape={self.shape})"

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderExceededError(f"cannot raise jet order {self.order} to {order}")
        lay = layout(self.nvars, order)
        return Jet(self.coeffs[..., : lay.size], lay)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            key = key + (slice(None),)
        return Jet(self.coeffs[key], self.layout)

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.coeffs.ndim - 1))
        elif isinstance(axis, int):
            axis = axis - 1 if axis < 0 else axis
        else:
            axis = tuple(a - 1 if a < 0 else a for a in axis)
        return Jet(self.coeffs.sum(axis=axis), self.layout)

    def _lead(self, axis: int) -> int:
        return axis - 1 if axis < 0 else axis

    def swapaxes(self, a: int, b: int) -> "Jet":
        return Jet(np.swapaxes(self.coeffs, self._lead(a), self._lead(b)), self.layout)

    def moveaxis(self, src: int, dst: int) -> "Jet":
        return Jet(np.moveaxis(self.coeffs, self._lead(src), self._lead(dst)), self.layout)

    def without_constant(self) -> "Jet":
        c = self.coeffs.copy()
        c[..., 0] = 0.0
        return Jet(c, self.layout)

    # ------------------------------------------------------------- coercion
    def _pair(self, other):
        """Coefficient arrays of self and other on a common layout."""
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets live in different variable spaces")
            if other.order == self.order:
                return self.coeffs, other.coeffs, self.layout
            lay = self.layout if self.order < other.order else other.layout
            return self.coeffs[..., : lay.size], other.coeffs[..., : lay.size], lay
        return self.coeffs, None, self.layout

    # ----------------------------------------------------------- arithmetic
    def __neg__(self) -> "Jet":
        return Jet(-self.coeffs, self.layout)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        a, b, lay = self._pair(other)
        if b is not None:
            return Jet(a + b, lay)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.shape, other.shape)
        c = np.array(np.broadcast_to(a, shape + (lay.size,)))
        c[..., 0] = c[..., 0] + other
        return Jet(c, lay)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        a, b, lay = self._pair(other)
        if b is not None:
            return Jet(_mul(a, b, lay), lay)
        return Jet(a * np.asarray(other, dtype=float)[..., None], lay)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        a, b, lay = self._pair(other)
        if b is None:
            return Jet(a / np.asarray(other, dtype=float)[..., None], lay)
        return Jet(_div(a, b, lay), lay)

    def __rtruediv__(self, other) -> "Jet":
        num = _const_coeffs(other, self.layout)
        return Jet(_div(num, self.coeffs, self.layout), self.layout)

    def __pow__(self, k) -> "Jet":
        if not isinstance(k, (int, np.integer)):
            return exp(log(self) * k)
        if k < 0:
            return 1.0 / (self ** (-k))
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result if result is not None else Jet.constant(np.ones(self.shape), self.layout)

    # ------------------------------------------------------ elementary maps
    def sqrt(self) -> "Jet":
        lay = self.layout
        a0 = self.coeffs[..., 0]
        if np.any(a0 < 0) or (lay.order > 0 and np.any(a0 == 0)):
            raise DomainError("square root evaluated at or below zero")
        s0 = np.sqrt(a0)
        at = self.coeffs.copy()
        at[..., 0] = 0.0
        st = np.zeros_like(at)
        two_s0 = (2.0 * s0)[..., None]
        for _ in range(lay.order):
            st = (at - _mul(st, st, lay)) / two_s0
        st[..., 0] = s0
        return Jet(st, lay)

    def log(self) -> "Jet":
        lay = self.layout
        a0 = self.coeffs[..., 0]
        if np.any(a0 <= 0):
            raise DomainError("logarithm of a non-positive value")
        u = self.coeffs / a0[..., None]
        u[..., 0] = 0.0
        coefs = [np.log(a0)] + [(-1.0) ** (k + 1) / k for k in range(1, lay.order + 1)]
        return Jet(_horner(coefs, u, lay), lay)

    def exp(self) -> "Jet":
        lay = self.layout
        a0 = self.coeffs[..., 0]
        e0 = np.exp(a0)
        u = self.coeffs.copy()
        u[..., 0] = 0.0
        coefs = [e0] + [e0 / math.factorial(k) for k in range(1, lay.order + 1)]
        return Jet(_horner(coefs, u, lay), lay)

    def atan(self) -> "Jet":
        lay = self.layout
        a0 = self.coeffs[..., 0]
        # atan(a) = atan(a0) + atan((a - a0) / (1 + a0 a))
        shifted = self.without_constant()
        w = shifted / (1.0 + self * a0)
        coefs = [np.arctan(a0)]
        for k in range(1, lay.order + 1):
            coefs.append(0.0 if k % 2 == 0 else (-1.0) ** ((k - 1) // 2) / k)
        return Jet(_horner(coefs, w.coeffs, lay), lay)

    # --------------------------------------------------------- derivatives
    def derivative(self, var: int) -> "Jet":
        """Jet of d/d(var) of the represented function; one order lower."""
        if self.order == 0:
            raise OrderExceededError("cannot differentiate an order-0 jet")
        src, fac = self.layout.derivative_table(var)
        return Jet(self.coeffs[..., src] * fac, layout(self.nvars, self.order - 1))

    def partial(self, multi_index: Sequence[int]):
        return partial(self, multi_index)

    def gradient(self) -> np.ndarray:
        """First partials at the expansion point, last axis over variables."""
        if self.order < 1:
            raise OrderExceededError("gradient needs order >= 1")
        return self.coeffs[..., 1 : 1 + self.nvars]

    def hessian(self) -> np.ndarray:
        """Second partials at the expansion point, last two axes over variables."""
        if self.order < 2:
            raise OrderExceededError("hessian needs order >= 2")
        lay = self.layout
        return self.coeffs[..., lay.hess_index] * lay.hess_factor


def _div(a: np.ndarray, b: np.ndarray, lay: Layout) -> np.ndarray:
    b0 = b[..., 0]
    if np.any(b0 == 0):
        raise DomainError("division by a jet with zero constant term")
    shape = np.broadcast_shapes(a.shape, b.shape)
    a = np.broadcast_to(a, shape)
    bt = np.array(np.broadcast_to(b, shape))
    bt[..., 0] = 0.0
    q = np.zeros(shape)
    q[..., 0] = a[..., 0] / b0
    b0 = b0[..., None]
    # each pass fixes one more homogeneous degree
    for _ in range(lay.order):
        q = (a - _mul(bt, q, lay)) / b0
    return q


# ------------------------------------------------------------------ seeding
def _check_order(order: int) -> None:
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_ORDER:
        raise UnsupportedConfigurationError(
            f"jet order must be an integer in [0, {MAX_ORDER}], got {order!r}"
        )


def seed_vars(values, order: int) -> list[Jet]:
    """Identity coordinate jets for a point ``values`` of shape (..., m)."""
    _check_order(order)
    values = np.asarray(values, dtype=float)
    m = values.shape[-1]
    lay = layout(m, order)
    out = []
    for i in range(m):
        c = np.zeros(values.shape[:-1] + (lay.size,))
        c[..., 0] = values[..., i]
        if order >= 1:
            c[..., 1 + i] = 1.0
        out.append(Jet(c, lay))
    return out


def seed(x, y, order: int) -> list[Jet]:
    """Jets of the 2n coordinate functions (x^1..x^n, y^1..y^n) at (x, y)."""
    _check_order(order)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"x and y shapes differ: {x.shape} vs {y.shape}")
    if x.shape[-1] < 2:
        raise UnsupportedConfigurationError(f"dimension n must be >= 2, got {x.shape[-1]}")
    return seed_vars(np.concatenate([x, y], axis=-1), order)


def partial(f_value: Jet, multi_index: Sequence[int]):
    """Partial derivative encoded by exponent tuple ``multi_index`` at the expansion point."""
    multi_index = tuple(int(k) for k in multi_index)
    if len(multi_index) != f_value.nvars:
        raise ValueError(
            f"multi-index has {len(multi_index)} entries, jet has {f_value.nvars} variables"
        )
    if sum(multi_index) > f_value.order:
        raise OrderExceededError(
            f"derivative of order {sum(multi_index)} requested from a jet of order {f_value.order}"
        )
    lay = f_value.layout
    k = lay.index[multi_index]
    v = f_value.coeffs[..., k] * lay.factorial[k]
    return v if np.ndim(v) else float(v)


# ---------------------------------------------------------- tensor helpers
def stack(items: Iterable, axis: int = 0) -> Jet:
    """Stack jets (and plain numbers, promoted to constants) along a new leading axis."""
    items = list(items)
    jets = [it for it in items if isinstance(it, Jet)]
    if not jets:
        raise ValueError("stack needs at least one jet")
    lay = min((j.layout for j in jets), key=lambda l: l.order)
    shape = np.broadcast_shapes(*(np.shape(it.value) if isinstance(it, Jet) else np.shape(it) for it in items))
    arrs = []
    for it in items:
        c = it.coeffs[..., : lay.size] if isinstance(it, Jet) else _const_coeffs(it, lay)
        arrs.append(np.broadcast_to(c, shape + (lay.size,)))
    ax = axis - 1 if axis < 0 else axis
    return Jet(np.stack(arrs, axis=ax), lay)


def _depth(nested) -> int:
    return 1 + _depth(nested[0]) if isinstance(nested, (list, tuple)) else 0


def as_jet_array(nested, like: Jet) -> Jet:
    """Turn a nested list (vector or matrix) of generic scalars into one jet array.

    The nested axes become trailing leading-axes, after any batch axes.
    """
    if isinstance(nested, (list, tuple)):
        inner = _depth(nested[0])
        return stack([as_jet_array(e, like) for e in nested], axis=-(inner + 1))
    if isinstance(nested, Jet):
        return nested
    return Jet.constant(np.broadcast_to(np.asarray(nested, dtype=float), like.shape), like.layout)


def einsum(subscripts: str, a, b) -> Jet:
    """Two-operand einsum where either operand may be a jet array.

    Subscripts address the leading (non-coefficient) axes only, e.g.
    ``"...ij,...jk->...ik"``.
    """
    lhs, out = subscripts.split("->")
    s1, s2 = lhs.split(",")
    z = "z"
    if isinstance(a, Jet) and isinstance(b, Jet):
        ac, bc, lay = a._pair(b)
        pa = ac[..., lay.mul_i]
        pb = bc[..., lay.mul_j]
        pairs = np.einsum(f"{s1}{z},{s2}{z}->{out}{z}", pa, pb)
        return Jet(np.add.reduceat(pairs, lay.mul_starts, axis=-1), lay)
    if isinstance(a, Jet):
        return Jet(np.einsum(f"{s1}{z},{s2}->{out}{z}", a.coeffs, np.asarray(b, float)), a.layout)
    if isinstance(b, Jet):
        return Jet(np.einsum(f"{s1},{s2}{z}->{out}{z}", np.asarray(a, float), b.coeffs), b.layout)
    return np.einsum(subscripts, a, b)


def checked_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a stack of matrices, refusing condition numbers above COND_LIMIT."""
    m = np.asarray(m, dtype=float)
    cond = np.linalg.cond(m)
    if np.any(~np.isfinite(cond)) or np.any(cond > COND_LIMIT):
        raise DegenerateMetricError(
            f"matrix condition number {np.max(cond):.3e} exceeds {COND_LIMIT:.0e}"
        )
    return np.linalg.inv(m)


def inverse(m: Jet) -> Jet:
    """Jet of the matrix inverse of a jet matrix with shape (..., n, n)."""
    lay = m.layout
    inv0 = checked_inverse(m.coeffs[..., 0])
    step = -einsum("...ij,...jk->...ik", inv0, m.without_constant())
    x = Jet.constant(inv0, lay)
    for _ in range(lay.order):
        x = einsum("...ij,...jk->...ik", step, x) + inv0
    return x


# ----------------------------------------------- generic elementary maps
_PLAIN = (int, float, np.integer, np.floating, np.ndarray)


def sqrt(v):
    if isinstance(v, Jet):
        return v.sqrt()
    if isinstance(v, _PLAIN):
        if np.any(np.asarray(v) < 0):
            raise DomainError("square root of a negative value")
        return np.sqrt(v)
    import mpmath

    return mpmath.sqrt(v)


def log(v):
    if isinstance(v, Jet):
        return v.log()
    if isinstance(v, _PLAIN):
        if np.any(np.asarray(v) <= 0):
            raise DomainError("logarithm of a non-positive value")
        return np.log(v)
    import mpmath

    return mpmath.log(v)


def exp(v):
    if isinstance(v, Jet):
        return v.exp()
    if isinstance(v, _PLAIN):
        return np.exp(v)
    import mpmath

    return mpmath.exp(v)


def atan(v):
    if isinstance(v, Jet):
        return v.atan()
    if isinstance(v, _PLAIN):
        return np.arctan(v)
    import mpmath

    return mpmath.atan(v)


def dot(u: Sequence, v: Sequence):
    """Euclidean pairing of two coordinate sequences of generic scalars."""
    total = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        total = total + a * b
    return total
