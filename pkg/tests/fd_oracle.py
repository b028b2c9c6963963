"""High-precision finite-difference oracle for partial derivatives of F^2.

Central stencils of order 1..4 per variable, tensor-multiplied for mixed
partials, with one Richardson level (h and h/2). Evaluation runs in mpmath
at 40 digits so the h^-4 cancellation does not eat the double-precision
budget; the metric definitions are generic over scalar types.
"""

from __future__ import annotations

import itertools

import mpmath

# central stencil weights on integer offsets, each accurate to O(h^2)
STENCILS = {
    0: {0: 1},
    1: {1: 0.5, -1: -0.5},
    2: {1: 1, 0: -2, -1: 1},
    3: {2: 0.5, 1: -1, -1: 1, -2: -0.5},
    4: {2: 1, 1: -4, 0: 6, -1: -4, -2: 1},
}


def multi_indices(nvars: int, max_order: int):
    for total in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), total):
            alpha = [0] * nvars
            for v in combo:
                alpha[v] += 1
            yield tuple(alpha)


class FDOracle:
    def __init__(self, f, point, h: float = 1e-3, dps: int = 40):
        self.f = f
        self.dps = dps
        with mpmath.workdps(dps):
            self.point = [mpmath.mpf(float(v)) for v in point]
            self.step = mpmath.mpf(h) / 2  # finest grid; the coarse level uses even offsets
        self.cache: dict = {}

    def _value(self, offset: tuple):
        v = self.cache.get(offset)
        if v is None:
            with mpmath.workdps(self.dps):
                z = [p + k * self.step for p, k in zip(self.point, offset)]
                v = self.f(z)
            self.cache[offset] = v
        return v

    def _stencil(self, alpha: tuple, scale: int):
        with mpmath.workdps(self.dps):
            h = self.step * scale
            total = mpmath.mpf(0)
            parts = [list(STENCILS[k].items()) for k in alpha]
            for combo in itertools.product(*parts):
                w = mpmath.mpf(1)
                offset = []
                for off, weight in combo:
                    w *= weight
                    offset.append(off * scale)
                total += w * self._value(tuple(offset))
            return total / h ** sum(alpha)

    def partial(self, alpha: tuple) -> float:
        with mpmath.workdps(self.dps):
            coarse = self._stencil(alpha, 2)
            fine = self._stencil(alpha, 1)
            return float((4 * fine - coarse) / 3)


def f_squared(metric, n: int):
    def f(z):
        F = metric.F(z[:n], z[n:])
        return F * F

    return f
