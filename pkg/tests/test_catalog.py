import math

import numpy as np
import pytest

from finsler_lab.catalog import (
    FAMILIES,
    beta_norm,
    beta_norm_squared,
    build_catalog_entry,
    build_space_form,
    coords,
    entry_from_spec,
)
from finsler_lab.errors import InvalidParameterError, OutOfDomainError, UnsupportedConfigurationError
from finsler_lab.sampling import sample_states


def _F(entry, x, y):
    return float(entry.metric.F(list(x), list(y)))


def test_space_form_values():
    assert build_space_form(0, 2)([0.4, 0.1], [3.0, 4.0]) == pytest.approx(5.0)
    assert build_space_form(-1, 2)([0.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0)
    assert build_space_form(1, 2)([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.sqrt(2) / 2)


def test_funk_at_origin():
    e = build_catalog_entry("funk", {"a": [0, 0]})
    assert _F(e, [0, 0], [1, 0]) == pytest.approx(1.0)
    assert float(e.c_ref([0.0, 0.0])) == 0.5
    assert float(e.K_ref([0.0, 0.0], [1.0, 0.0])) == -0.25


def test_b2_at_origin():
    e = build_catalog_entry("b2", {"k": 1, "a": [0, 0]})
    assert float(e.c_ref([0.0, 0.0])) == pytest.approx(0.5)
    for y in ([1.0, 0.0], [0.3, -2.0]):
        assert float(e.K_ref([0.0, 0.0], y)) == pytest.approx(0.75)


def test_example31_at_origin():
    e = build_catalog_entry("example31", {"eps": 0.5})
    o = [0.0, 0.0]
    assert float(e.c_ref(o)) == pytest.approx(math.sqrt(3) / 2)
    assert float(e.sigma_ref(o)) == pytest.approx(7.25)
    assert float(e.nu_ref(o)) == pytest.approx(12.0)
    assert float(e.beta_complement_ref(o)) == pytest.approx(1.0)
    assert float(beta_norm_squared(e.metric, np.array([1.0, 0.0]))) == pytest.approx(0.5, rel=1e-14)


def test_beta_vanishes_at_origin():
    for fam, p in [("funk", {}), ("b1", {"lambda": 0.0}), ("b2", {"k": 1}), ("b3", {"eps": 0.0})]:
        e = build_catalog_entry(fam, p)
        assert beta_norm(e.metric, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("sign,lam,a", [("+", 1.0, [0.5, 0.0]), ("-", 1.5, [0.5, 0.0]), ("+", 0.3, [0.2, 0.4])])
def test_b1_beta_complement(sign, lam, a):
    e = build_catalog_entry("b1", {"lambda": lam, "a": a}, sign=sign)
    x, _ = sample_states(e, 30, 3)
    s = 1.0 if sign == "+" else -1.0
    r2 = np.sum(x * x, axis=-1)
    ax = x @ np.asarray(a)
    ref = (1 - r2) * (s - (np.dot(a, a) - lam**2)) / ((lam + ax) ** 2 + s * (1 - r2))
    np.testing.assert_allclose(1.0 - beta_norm_squared(e.metric, x), ref, rtol=1e-12)


def test_reference_form_matches_assembled():
    for fam in FAMILIES:
        e = build_catalog_entry(fam, {})
        x, y = sample_states(e, 20, 5)
        F = np.asarray(e.metric.F(coords(x), coords(y)))
        A = np.asarray(e.metric.assembled(coords(x), coords(y)))
        np.testing.assert_allclose(F, A, rtol=1e-12)


def test_positive_homogeneity_and_asymmetry():
    e = build_catalog_entry("funk", {})
    x, y = [0.3, 0.1], [0.5, 0.8]
    assert _F(e, x, [2 * v for v in y]) == pytest.approx(2 * _F(e, x, y), rel=1e-14)
    assert _F(e, x, [-v for v in y]) != pytest.approx(_F(e, x, y))


def test_parameter_validation():
    with pytest.raises(InvalidParameterError):
        build_catalog_entry("b1", {"lambda": 1.0, "a": [2.0, 0.0]})
    with pytest.raises(InvalidParameterError):
        build_catalog_entry("funk", {"a": [1.0, 0.0]})
    with pytest.raises(InvalidParameterError):
        build_catalog_entry("nope")
    with pytest.raises(InvalidParameterError):
        build_catalog_entry("space_form", {"mu": 2})
    with pytest.raises(UnsupportedConfigurationError):
        build_catalog_entry("funk", {}, n=1)


def test_domain_check():
    e = build_catalog_entry("funk", {})
    with pytest.raises(OutOfDomainError):
        e.metric.check_domain(np.array([1.2, 0.0]))
    assert not e.metric.admissible(np.array([[0.0, 1.0]]))[0]


def test_aliases_and_spec_round_trip():
    e = build_catalog_entry("euclidean")
    assert e.family == "space_form" and e.mu == 0
    e2 = build_catalog_entry("b3", {"eps": 0.2, "a": [0.3, 0, 0]})
    assert e2.n == 3
    e3 = entry_from_spec(e2.spec())
    assert e3.spec() == e2.spec()
    with pytest.raises(InvalidParameterError):
        entry_from_spec({"params": {}})


def test_sampling_is_deterministic_and_admissible(monkeypatch):
    e = build_catalog_entry("b1", {"lambda": 1.0, "a": [0.5, 0.0]})
    x1, y1 = sample_states(e, 40, 11)
    x2, y2 = sample_states(e, 40, 11)
    np.testing.assert_array_equal(x1, x2)
    np.testing.assert_array_equal(y1, y2)
    assert np.all(e.metric.admissible(x1))
    np.testing.assert_allclose(np.linalg.norm(y1, axis=-1), 1.0)
    monkeypatch.setenv("FINSLER_LAB_SEED", "11")
    x3, _ = sample_states(e, 40)
    np.testing.assert_array_equal(x1, x3)
