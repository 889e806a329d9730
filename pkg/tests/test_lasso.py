"""Penalized multinomial regression: path, KKT optimality, prediction, CV."""

import numpy as np
import pytest

from terracut import (
    BadReference,
    CoefficientMatrix,
    DegenerateClass,
    DimensionMismatch,
    FoldTooSmall,
    NonConvergence,
    ValidationError,
    contrasts_vs_reference,
    cv_lambda,
    fit,
    lambda_max,
    predict_proba,
    probability_curves,
)
from terracut.lasso import DesignMatrix
from terracut.ingest import StandardizationParams

from helpers import binomial_lasso, kkt_violation


def make_data(rng, n, p, K, noise=1.0):
    """Standardized X with labels 1..K from a random linear softmax model."""
    while True:
        X = rng.normal(size=(n, p))
        X = (X - X.mean(axis=0)) / X.std(axis=0)
        beta = rng.normal(size=(p, K))
        scores = X @ beta + noise * rng.normal(size=(n, K))
        y = scores.argmax(axis=1) + 1
        if len(np.unique(y)) == K:
            return X, y


def coefs_of(intercepts, slopes, lam=0.1) -> CoefficientMatrix:
    return CoefficientMatrix(
        intercepts=np.asarray(intercepts, dtype=float),
        slopes=np.asarray(slopes, dtype=float),
        lam=lam,
    )


# --- lambda_max ------------------------------------------------------------------

def test_lambda_max_equals_the_null_score_bound():
    rng = np.random.default_rng(70)
    X, y = make_data(rng, 80, 5, 3)
    classes, counts = np.unique(y, return_counts=True)
    freq = counts / counts.sum()
    want = 0.0
    for j in range(5):
        for k, c in enumerate(classes):
            score = float(X[:, j] @ ((y == c).astype(float) - freq[k])) / len(y)
            want = max(want, abs(score))
    assert lambda_max(X, y) == pytest.approx(want, rel=1e-12)


def test_zero_design_has_zero_lambda_max():
    y = np.array([1, 1, 2, 2, 3, 3])
    assert lambda_max(np.zeros((6, 3)), y) == 0.0


def test_null_model_predicts_class_frequencies():
    rng = np.random.default_rng(71)
    X, y = make_data(rng, 60, 4, 3)
    lmax = lambda_max(X, y)
    f = fit(X, y, lambdas=[1.5 * lmax])
    point = f.path[0]
    assert not point.slopes.any()
    assert f.sweeps == [0]
    _, counts = np.unique(y, return_counts=True)
    P = predict_proba(point, X)
    assert P == pytest.approx(np.tile(counts / len(y), (60, 1)), abs=1e-12)


def test_lambda_max_brackets_the_first_activation():
    rng = np.random.default_rng(72)
    X, y = make_data(rng, 60, 4, 3)
    lmax = lambda_max(X, y)
    high = fit(X, y, lambdas=[1.01 * lmax]).path[0]
    low = fit(X, y, lambdas=[0.99 * lmax]).path[0]
    assert high.n_nonzero() == 0
    assert low.n_nonzero() > 0


# --- optimality -------------------------------------------------------------------

def test_every_path_point_satisfies_kkt():
    rng = np.random.default_rng(73)
    X, y = make_data(rng, 60, 4, 3)
    f = fit(X, y)
    assert len(f.path) == 100
    for lam, coefs in zip(f.lambdas, f.path):
        assert kkt_violation(X, y, coefs, float(lam)) <= 1e-6


def test_two_class_fit_matches_a_binomial_lasso():
    rng = np.random.default_rng(74)
    for _ in range(3):
        X, y = make_data(rng, 70, 4, 2)
        lam = 0.3 * lambda_max(X, y)
        point = fit(X, y, lambdas=[lam]).path[0]
        P_multi = predict_proba(point, X)[:, 1]
        # same objective in the logit difference: the symmetric slopes split
        # as +-delta/2, so the l1 terms match one binomial slope vector
        _, _, P_bin = binomial_lasso(X, (y == 2).astype(float), lam)
        assert np.abs(P_multi - P_bin).max() < 1e-5


def test_objective_trace_never_increases():
    rng = np.random.default_rng(75)
    X, y = make_data(rng, 50, 3, 3)
    f = fit(X, y, n_lambda=30)
    assert any(len(tr) > 1 for tr in f.objective_traces)
    for trace in f.objective_traces:
        for a, b in zip(trace, trace[1:]):
            assert b <= a + 1e-12


def test_path_lambdas_decrease_and_span_three_decades():
    rng = np.random.default_rng(76)
    X, y = make_data(rng, 40, 3, 2)
    f = fit(X, y)
    lams = f.lambdas
    assert (lams[:-1] > lams[1:]).all()
    assert lams[0] == pytest.approx(lambda_max(X, y), rel=1e-12)
    assert lams[-1] == pytest.approx(1e-3 * lams[0], rel=1e-9)


def test_fit_is_deterministic():
    rng = np.random.default_rng(77)
    X, y = make_data(rng, 50, 4, 3)
    a = fit(X, y, n_lambda=20)
    b = fit(X, y, n_lambda=20)
    for ca, cb in zip(a.path, b.path):
        assert np.array_equal(ca.intercepts, cb.intercepts)
        assert np.array_equal(ca.slopes, cb.slopes)


def test_reported_intercepts_are_mean_centered():
    rng = np.random.default_rng(78)
    X, y = make_data(rng, 50, 3, 4)
    f = fit(X, y, n_lambda=15)
    for point in f.path:
        assert abs(point.intercepts.mean()) < 1e-12


def test_path_is_continuous_on_well_conditioned_data():
    # weak-signal labels keep probabilities interior, so the solution moves
    # smoothly; the bound is a loose smoke check, not a sharp constant
    rng = np.random.default_rng(79)
    for _ in range(2):
        X, y = make_data(rng, 100, 4, 3, noise=3.0)
        f = fit(X, y)
        for a, b, la, lb in zip(f.path, f.path[1:], f.lambdas, f.lambdas[1:]):
            move = np.sqrt(
                ((a.slopes - b.slopes) ** 2).sum()
                + ((a.intercepts - b.intercepts) ** 2).sum()
            )
            assert move <= 100.0 * (float(la) - float(lb))


def test_active_set_grows_with_shrinking_lambda_in_aggregate():
    rng = np.random.default_rng(80)
    agree = total = 0
    for _ in range(50):
        K = int(rng.integers(2, 4))
        X, y = make_data(rng, 40, 3, K)
        f = fit(X, y, n_lambda=30)
        sizes = [point.n_nonzero() for point in f.path]
        for a, b in zip(sizes, sizes[1:]):
            agree += a <= b
            total += 1
    assert agree / total >= 0.90


def test_sweep_cap_raises_nonconvergence():
    rng = np.random.default_rng(81)
    X, y = make_data(rng, 60, 4, 3)
    lam = 0.01 * lambda_max(X, y)
    with pytest.raises(NonConvergence) as exc:
        fit(X, y, lambdas=[lam], max_sweeps=1)
    assert exc.value.lam == pytest.approx(lam, rel=1e-12)
    assert exc.value.sweeps == 1


def test_input_validation():
    rng = np.random.default_rng(82)
    X, y = make_data(rng, 30, 3, 2)
    with pytest.raises(DegenerateClass):
        fit(X, np.ones(30))
    with pytest.raises(ValidationError):
        fit(X, y[:-1])
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValidationError):
        fit(bad, y)
    with pytest.raises(ValidationError):
        fit(X, y, lambdas=[])


def test_design_matrix_carries_names_into_the_fit():
    rng = np.random.default_rng(83)
    X, y = make_data(rng, 40, 3, 2)
    dm = DesignMatrix(
        X=X,
        feature_names=["alpha", "beta", "gamma"],
        standardization=StandardizationParams(means=np.zeros(3), sds=np.ones(3)),
    )
    f = fit(dm, y, n_lambda=5)
    assert f.feature_names == ["alpha", "beta", "gamma"]
    assert f.classes.tolist() == [1, 2]
    assert f.class_index(2) == 1


# --- prediction -------------------------------------------------------------------

def test_zero_coefficients_predict_uniformly():
    point = coefs_of(np.zeros(4), np.zeros((3, 4)))
    P = predict_proba(point, np.array([[1.0, -2.0, 0.5]]))
    assert P[0] == pytest.approx([0.25] * 4, abs=1e-15)


def test_hand_set_logits_recover_softmax():
    point = coefs_of([0.0, np.log(2.0), np.log(3.0)], np.zeros((2, 3)))
    P = predict_proba(point, np.zeros((1, 2)))
    assert P[0] == pytest.approx([1 / 6, 2 / 6, 3 / 6], abs=1e-12)


def test_equal_logits_split_evenly_for_two_classes():
    point = coefs_of([0.0, 0.0], np.array([[0.7, 0.7], [-0.2, -0.2]]))
    P = predict_proba(point, np.array([[1.0, 2.0]]))
    assert P[0] == pytest.approx([0.5, 0.5], abs=1e-15)


def test_probabilities_are_a_distribution():
    rng = np.random.default_rng(84)
    point = coefs_of(rng.normal(size=4), rng.normal(size=(3, 4)))
    P = predict_proba(point, rng.normal(size=(20, 3)))
    assert (P > 0).all() and (P < 1).all()
    assert np.abs(P.sum(axis=1) - 1).max() < 1e-12


def test_extreme_logits_stay_finite():
    point = coefs_of([0.0, 0.0], np.array([[1000.0, -1000.0]]))
    P = predict_proba(point, np.array([[5.0], [-5.0]]))
    assert np.isfinite(P).all()
    assert np.abs(P.sum(axis=1) - 1).max() < 1e-12


def test_predict_rejects_wrong_width():
    point = coefs_of(np.zeros(2), np.zeros((3, 2)))
    with pytest.raises(DimensionMismatch):
        predict_proba(point, np.zeros((4, 2)))


# --- probability curves ---------------------------------------------------------------

def test_zero_fit_gives_flat_curves():
    point = coefs_of(np.zeros(3), np.zeros((2, 3)))
    curves = probability_curves(point, 0, np.linspace(-3, 3, 7))
    assert curves.shape == (7, 3)
    assert curves == pytest.approx(np.full((7, 3), 1 / 3), abs=1e-15)


def test_single_positive_slope_makes_that_class_monotone():
    slopes = np.zeros((2, 3))
    slopes[0, 1] = 0.8  # only class 1 responds to covariate 0
    point = coefs_of(np.zeros(3), slopes)
    curves = probability_curves(point, 0, np.linspace(-3, 3, 25))
    assert (np.diff(curves[:, 1]) > 0).all()
    assert (np.diff(curves[:, 0]) < 0).all()
    assert np.abs(curves.sum(axis=1) - 1).max() < 1e-12


def test_curves_hold_other_covariates_at_baseline():
    rng = np.random.default_rng(85)
    point = coefs_of(rng.normal(size=3), rng.normal(size=(4, 3)))
    grid = np.array([-1.0, 0.0, 2.0])
    base = np.array([0.5, -0.25, 0.0, 1.0])
    curves = probability_curves(point, 2, grid, baseline=base)
    for gi, v in enumerate(grid):
        x = base.copy()
        x[2] = v
        assert curves[gi] == pytest.approx(predict_proba(point, x)[0], abs=1e-15)


def test_curve_input_validation():
    point = coefs_of(np.zeros(3), np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        probability_curves(point, 2, [0.0, 1.0])
    with pytest.raises(ValidationError):
        probability_curves(point, 0, [])
    with pytest.raises(DimensionMismatch):
        probability_curves(point, 0, [0.0], baseline=np.zeros(5))


# --- contrasts --------------------------------------------------------------------------

def test_reference_column_becomes_zero():
    rng = np.random.default_rng(86)
    point = coefs_of(rng.normal(size=4), rng.normal(size=(3, 4)))
    con = contrasts_vs_reference(point, 2)
    assert con.intercepts[2] == 0.0
    assert not con.slopes[:, 2].any()
    assert con.slopes[:, 0] == pytest.approx(point.slopes[:, 0] - point.slopes[:, 2])


def test_contrasts_preserve_probabilities():
    rng = np.random.default_rng(87)
    point = coefs_of(rng.normal(size=5), rng.normal(size=(3, 5)))
    X = rng.normal(size=(15, 3))
    P_raw = predict_proba(point, X)
    for ref in range(5):
        P_con = predict_proba(contrasts_vs_reference(point, ref), X)
        assert np.abs(P_con - P_raw).max() < 1e-12


def test_softmax_shift_invariance():
    rng = np.random.default_rng(88)
    point = coefs_of(rng.normal(size=3), rng.normal(size=(2, 3)))
    shift_b = rng.normal()
    shifted = CoefficientMatrix(
        intercepts=point.intercepts + shift_b,
        slopes=point.slopes + rng.normal(size=(2, 1)),
        lam=point.lam,
    )
    X = rng.normal(size=(10, 2))
    assert np.abs(predict_proba(shifted, X) - predict_proba(point, X)).max() < 1e-12


def test_two_class_contrast_is_the_coefficient_difference():
    rng = np.random.default_rng(89)
    X, y = make_data(rng, 60, 3, 2)
    point = fit(X, y, lambdas=[0.2 * lambda_max(X, y)]).path[0]
    con = contrasts_vs_reference(point, 0)
    assert con.slopes[:, 1] == pytest.approx(point.slopes[:, 1] - point.slopes[:, 0])


def test_bad_reference_is_rejected():
    point = coefs_of(np.zeros(3), np.zeros((2, 3)))
    with pytest.raises(BadReference):
        contrasts_vs_reference(point, 3)
    with pytest.raises(BadReference):
        contrasts_vs_reference(point, -1)


# --- cross-validation ---------------------------------------------------------------------

def test_pure_noise_selects_heavy_shrinkage():
    rng = np.random.default_rng(90)
    X = rng.normal(size=(60, 4))
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    y = np.tile([1, 2, 3], 20)
    res = cv_lambda(X, y, n_folds=5, seed=0, n_lambda=40)
    assert res.lambda_ >= float(np.median(res.lambdas))


def test_strong_signal_selects_light_shrinkage():
    rng = np.random.default_rng(91)
    X, y = make_data(rng, 90, 4, 3, noise=0.3)
    res = cv_lambda(X, y, n_folds=5, seed=0, n_lambda=40)
    assert res.index >= len(res.lambdas) // 2  # bottom half of the path


def test_cv_is_deterministic_in_the_seed():
    rng = np.random.default_rng(92)
    X, y = make_data(rng, 45, 3, 3)
    a = cv_lambda(X, y, n_folds=3, seed=7, n_lambda=20)
    b = cv_lambda(X, y, n_folds=3, seed=7, n_lambda=20)
    assert a.lambda_ == b.lambda_ and a.index == b.index
    assert np.array_equal(a.mean_deviance, b.mean_deviance)
    assert sum(a.fold_sizes) == 45


def test_cv_rejects_thin_classes():
    X = np.random.default_rng(93).normal(size=(5, 2))
    y = np.array([1, 1, 1, 1, 2])
    with pytest.raises(FoldTooSmall):
        cv_lambda(X, y, n_folds=2)
    with pytest.raises(ValidationError):
        cv_lambda(X, np.array([1, 1, 2, 2, 1]), n_folds=1)
