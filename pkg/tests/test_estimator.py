"""Tests for the scikit-learn style transformer facade."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from gridwave import UsageError, WaveletFilterBank

PARAMS = dict(wavelet="cauchy:300", m=16, m_c=2, d=8, delays="kronecker")


def make_x(n_samples=3, n_features=100, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_samples, n_features))


def test_get_set_params_and_clone():
    est = WaveletFilterBank(**PARAMS)
    params = est.get_params()
    assert params["m"] == 16
    assert params["wavelet"] == "cauchy:300"
    est2 = clone(est)
    assert est2.get_params() == params
    est.set_params(m=32)
    assert est.get_params()["m"] == 32


def test_defaults_follow_reference_configuration():
    est = WaveletFilterBank()
    p = est.get_params()
    assert (p["m"], p["m_c"], p["d"]) == (253, 5, 254)
    assert p["delays"] == "kronecker"
    assert p["real_mode"] is True


def test_requires_fit_before_transform():
    est = WaveletFilterBank(**PARAMS)
    with pytest.raises(NotFittedError):
        est.transform(make_x())


def test_fit_sets_attributes():
    est = WaveletFilterBank(**PARAMS)
    X = make_x(n_features=100)
    est.fit(X)
    assert est.n_features_in_ == 100
    assert est.design_.params.L == 104  # padded to a multiple of d
    assert est.dual_.is_dual


def test_transform_shape_and_dtype():
    est = WaveletFilterBank(**PARAMS).fit(make_x())
    Z = est.transform(make_x())
    n_frames = est.design_.N
    assert Z.shape == (3, 17 * n_frames)
    assert np.iscomplexobj(Z)


def test_roundtrip_through_inverse():
    X = make_x(n_samples=4, n_features=100, seed=3)
    est = WaveletFilterBank(**PARAMS).fit(X)
    Z = est.transform(X)
    back = est.inverse_transform(Z)
    assert back.shape == X.shape
    assert np.linalg.norm(back - X) <= 1e-8 * np.linalg.norm(X)


def test_roundtrip_exact_multiple_length():
    X = make_x(n_samples=2, n_features=128, seed=4)
    est = WaveletFilterBank(**PARAMS).fit(X)
    back = est.inverse_transform(est.transform(X))
    assert back.shape == X.shape
    assert np.linalg.norm(back - X) <= 1e-8 * np.linalg.norm(X)


def test_fit_transform_matches_transform():
    X = make_x(seed=5)
    est = WaveletFilterBank(**PARAMS)
    Z1 = est.fit_transform(X)
    Z2 = est.transform(X)
    np.testing.assert_array_equal(Z1, Z2)


def test_feature_count_mismatch():
    est = WaveletFilterBank(**PARAMS).fit(make_x(n_features=100))
    with pytest.raises(UsageError):
        est.transform(make_x(n_features=64))
    Z = est.transform(make_x(n_features=100))
    with pytest.raises(UsageError):
        est.inverse_transform(Z[:, :-1])


def test_wavelet_spec_instance_accepted():
    from gridwave import WaveletSpec

    est = WaveletFilterBank(wavelet=WaveletSpec.bspline4(6.0), m=16, m_c=8,
                            d=8)
    X = make_x(seed=6)
    back = est.inverse_transform(est.fit_transform(X))
    assert np.linalg.norm(back - X) <= 1e-8 * np.linalg.norm(X)


def test_complex_mode_fit_fails_on_one_sided_bank():
    # One-sided wavelet channels cover no negative frequencies: complex
    # signals are not representable and the dual solve must refuse.
    from gridwave import NonInvertibleError

    est = WaveletFilterBank(real_mode=False, **PARAMS)
    with pytest.raises(NonInvertibleError):
        est.fit(make_x(seed=7))


def test_rejects_one_dimensional_input():
    est = WaveletFilterBank(**PARAMS)
    with pytest.raises(UsageError, match="one signal per row"):
        est.fit(np.zeros(100))
