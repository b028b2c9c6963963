import itertools

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from finsler_lab import jets
from finsler_lab.errors import DomainError, OrderExceededError, UnsupportedConfigurationError
from finsler_lab.jets import Jet

from fd_oracle import multi_indices


def _sympy_partials(expr, syms, point, order):
    subs = dict(zip(syms, point))
    out = {}
    for alpha in multi_indices(len(syms), order):
        d = expr
        for s, k in zip(syms, alpha):
            if k:
                d = sp.diff(d, s, k)
        out[alpha] = float(d.subs(subs).evalf(30))
    return out


def test_seed_identity_coordinates():
    S = jets.seed([0.0, 0.0], [1.0, 0.0], 1)
    assert len(S) == 4
    assert S[0].value == 0.0
    assert np.array_equal(S[0].gradient(), [1.0, 0.0, 0.0, 0.0])
    assert S[2].value == 1.0


def test_quadratic_form_partials():
    S = jets.seed([0.0, 0.0], [1.0, 0.0], 2)
    f = S[2] * S[2] + S[3] * S[3]
    assert jets.partial(f, (0, 0, 2, 0)) == 2.0
    assert jets.partial(f, (1, 1, 0, 0)) == 0.0
    assert jets.partial(f, (1, 0, 1, 0)) == 0.0


def test_product_mixed_partial_is_one():
    S = jets.seed([0.3, -0.2], [1.7, 2.5], 2)
    assert jets.partial(S[2] * S[3], (0, 0, 1, 1)) == 1.0


def test_norm_gradient():
    S = jets.seed([0.0, 0.0], [3.0, 4.0], 2)
    r = (S[2] * S[2] + S[3] * S[3]).sqrt()
    assert r.value == pytest.approx(5.0, abs=0)
    assert jets.partial(r, (0, 0, 1, 0)) == pytest.approx(0.6, rel=1e-15)


@pytest.mark.parametrize(
    "builder",
    [
        lambda a, b, c: a * b * c + a * a,
        lambda a, b, c: (a + 2.0 * b) / (1.0 + c * c),
        lambda a, b, c: (1.0 + a * a + b * c).sqrt(),
        lambda a, b, c: (2.0 + a * b).log() + (a - c).exp(),
        lambda a, b, c: (a * b).atan() - 3.0 / (2.0 + c),
        lambda a, b, c: (1.0 + a * a) ** 3 - (2.0 + b) ** -2,
    ],
)
def test_against_symbolic_derivatives(builder):
    point = (0.3, -0.4, 0.7)
    syms = sp.symbols("u v w")
    sym_ops = {
        "sqrt": sp.sqrt,
        "log": sp.log,
        "exp": sp.exp,
        "atan": sp.atan,
    }

    class SymWrap:
        def __init__(self, e):
            self.e = e

        def _w(self, o):
            return o.e if isinstance(o, SymWrap) else o

        def __add__(self, o):
            return SymWrap(self.e + self._w(o))

        __radd__ = __add__

        def __sub__(self, o):
            return SymWrap(self.e - self._w(o))

        def __rsub__(self, o):
            return SymWrap(self._w(o) - self.e)

        def __mul__(self, o):
            return SymWrap(self.e * self._w(o))

        __rmul__ = __mul__

        def __truediv__(self, o):
            return SymWrap(self.e / self._w(o))

        def __rtruediv__(self, o):
            return SymWrap(self._w(o) / self.e)

        def __pow__(self, k):
            return SymWrap(self.e**k)

        def __getattr__(self, name):
            return lambda: SymWrap(sym_ops[name](self.e))

    expr = builder(*[SymWrap(s) for s in syms]).e
    ref = _sympy_partials(expr, syms, point, 4)
    got = builder(*jets.seed_vars(np.array(point), 4))
    for alpha, want in ref.items():
        assert jets.partial(got, alpha) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_order_zero_is_plain_arithmetic():
    a, b = 0.37, 1.91
    A, B = jets.seed_vars(np.array([a, b]), 0)
    assert (A * B / (A + B)).value == a * b / (a + b)
    assert (A * A + B).sqrt().value == np.sqrt(a * a + b)


def test_batched_jets_match_scalar_jets():
    pts = np.array([[0.1, 0.2], [0.5, -0.3], [-0.2, 0.9]])
    X = jets.seed_vars(pts, 3)
    f = (X[0] * X[1] + 1.0).log() * X[0]
    for i, p in enumerate(pts):
        Y = jets.seed_vars(p, 3)
        g = (Y[0] * Y[1] + 1.0).log() * Y[0]
        np.testing.assert_array_equal(f.coeffs[i], g.coeffs)


def test_inverse_matrix_jet():
    X = jets.seed_vars(np.array([0.2, 0.4]), 3)
    m = jets.stack([jets.stack([2.0 + X[0], X[1]]), jets.stack([X[1], 1.0 + X[0] * X[0]])])
    inv = jets.inverse(m)
    prod = jets.einsum("ij,jk->ik", m, inv)
    np.testing.assert_allclose(prod.coeffs[..., 0], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(prod.coeffs[..., 1:], 0.0, atol=1e-13)


def test_errors():
    with pytest.raises(UnsupportedConfigurationError):
        jets.seed([0.0, 0.0], [1.0, 0.0], 5)
    with pytest.raises(UnsupportedConfigurationError):
        jets.seed([0.0], [1.0], 2)
    S = jets.seed([0.0, 0.0], [1.0, 0.0], 2)
    with pytest.raises(OrderExceededError):
        jets.partial(S[0], (3, 0, 0, 0))
    with pytest.raises(DomainError):
        (S[0] - 1.0).log()
    with pytest.raises(DomainError):
        (-1.0 - S[0] * S[0]).sqrt()
    with pytest.raises(OrderExceededError):
        S[0].truncate(3)


def test_truncate_and_derivative_consistency():
    X = jets.seed_vars(np.array([0.3, 0.6]), 4)
    f = (X[0] * X[1]).exp()
    d = f.derivative(0)
    assert d.order == 3
    for alpha in multi_indices(2, 3):
        up = (alpha[0] + 1, alpha[1])
        assert jets.partial(d, alpha) == pytest.approx(jets.partial(f, up), rel=1e-13)
    np.testing.assert_array_equal(f.truncate(2).coeffs, f.coeffs[..., : f.truncate(2).layout.size])


finite = st.floats(-2.0, 2.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(finite, finite, st.floats(0.5, 3.0))
def test_algebraic_identities(u, v, w):
    X = jets.seed_vars(np.array([u, v, w]), 4)
    a, b, c = X
    lhs = (a + b) * (a - b)
    rhs = a * a - b * b
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)
    q = (a * c) / c
    np.testing.assert_allclose(q.coeffs, a.coeffs, atol=1e-11)
    s = c.sqrt()
    np.testing.assert_allclose((s * s).coeffs, c.coeffs, atol=1e-11)
    e = c.log().exp()
    np.testing.assert_allclose(e.coeffs, c.coeffs, atol=1e-11)


@settings(max_examples=30, deadline=None)
@given(st.lists(finite, min_size=4, max_size=4))
def test_partials_are_symmetric(p):
    X = jets.seed_vars(np.array(p), 4)
    f = (X[0] * X[1] + X[2] * X[3] * X[0]).atan()
    H = f.hessian()
    np.testing.assert_allclose(H, H.T, atol=0)
    for i, j in itertools.combinations(range(4), 2):
        assert H[i, j] == jets.partial(f, tuple(int(k in (i, j)) for k in range(4)))


def test_generic_functions_accept_floats():
    assert jets.sqrt(4.0) == 2.0
    assert jets.log(1.0) == 0.0
    assert isinstance(jets.sqrt(jets.seed_vars(np.array([4.0]), 1)[0]), Jet)
