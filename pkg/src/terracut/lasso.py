"""L1-penalized multinomial logistic regression by block coordinate descent.

Symmetric softmax parameterization: every class gets an intercept and a
slope vector, the penalty covers all slopes, intercepts are free. The
objective is

    mean negative log-likelihood + lambda * sum over j,k of |beta_jk|

minimized along a descending lambda path with warm starts. Each step is a
proximal update of one covariate's coefficients across all classes with
per-class diagonal curvature 2 sum x_ij^2 p_ik (1 - p_ik) / n, guarded by a
quadratic-bound descent test that doubles the curvature toward the global
spectral cap sum x_ij^2 / (2n) when the test fails, so every sweep is a
guaranteed descent step; the objective trace is recorded per path point and
tests assert its monotonicity. Near the optimum plain sweeps contract along
one slow mode, so after each sweep the solver tries extrapolating along the
sweep displacement, keeping the best factor found by a doubling line search.
Convergence is declared on the stationarity residual of the optimality
conditions, not on coefficient movement, which adaptive step sizes can keep
jittering at float resolution long after the objective has converged.

The symmetric parameterization is shift-invariant per covariate: adding a
constant to a covariate's coefficients for every class leaves all fitted
probabilities unchanged but raises the penalty. After each block update the
shift that minimizes the penalty (the median) is applied when it strictly
helps, which both speeds convergence and zeroes redundant coefficients.

The solver works with exact row-shifted softmax probabilities; predictions
clip linear predictors to +-30, which keeps reported probabilities strictly
inside (0, 1) and every downstream log finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadReference,
    DegenerateClass,
    DimensionMismatch,
    FoldTooSmall,
    NonConvergence,
    ValidationError,
)
from .ingest import Dataset, StandardizationParams, standardize

ETA_CAP = 30.0


@dataclass(frozen=True)
class DesignMatrix:
    """Standardized covariate matrix plus the constants that produced it."""

    X: np.ndarray
    feature_names: list[str]
    standardization: StandardizationParams


def design_matrix(dataset: Dataset) -> DesignMatrix:
    Z, params = standardize(dataset.indicators, dataset.indicator_names)
    return DesignMatrix(
        X=Z, feature_names=list(dataset.indicator_names), standardization=params
    )


@dataclass(frozen=True)
class CoefficientMatrix:
    """One point on the regularization path."""

    intercepts: np.ndarray  # (K,)
    slopes: np.ndarray      # (p, K)
    lam: float

    def n_nonzero(self) -> int:
        return int(np.count_nonzero(self.slopes))


@dataclass
class LassoFit:
    lambdas: np.ndarray
    path: list[CoefficientMatrix]
    classes: np.ndarray
    feature_names: list[str] | None = None
    standardization: StandardizationParams | None = None
    sweeps: list[int] = field(default_factory=list)
    kkt_residuals: list[float] = field(default_factory=list)
    objective_traces: list[list[float]] = field(default_factory=list)

    def class_index(self, label) -> int:
        hits = np.nonzero(self.classes == label)[0]
        if len(hits) != 1:
            raise BadReference(label, len(self.classes))
        return int(hits[0])


def _clip_softmax(ETA: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    E = np.exp(np.clip(ETA, -ETA_CAP, ETA_CAP))
    return E, E.sum(axis=1)


def _exact_softmax(ETA: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-shifted softmax pieces (E, denom, rowmax); overflow-free and exact."""
    rowmax = ETA.max(axis=1)
    E = np.exp(ETA - rowmax[:, None])
    return E, E.sum(axis=1), rowmax


def _one_hot(y, classes) -> np.ndarray:
    idx = np.searchsorted(classes, y)
    Y = np.zeros((len(y), len(classes)))
    Y[np.arange(len(y)), idx] = 1.0
    return Y


def _validate_xy(X, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ValidationError("X must be 2-d")
    if len(y) != len(X):
        raise ValidationError("y length must match X rows")
    if not np.all(np.isfinite(X)):
        raise ValidationError("X has non-finite entries")
    classes = np.unique(y)
    if len(classes) < 2:
        raise DegenerateClass(f"need >= 2 classes, got {len(classes)}")
    if len(X) < len(classes):
        raise ValidationError("need at least one row per class")
    return X, y, classes


def lambda_max(X, y) -> float:
    """Smallest penalty at which every slope is zero.

    At the intercept-only optimum each row's probability vector equals the
    class frequencies, so the slope score matrix is X'(Y - pi_hat)/n and the
    largest absolute entry is the activation threshold.
    """
    X, y, classes = _validate_xy(X, y)
    Y = _one_hot(y, classes)
    resid = Y - Y.mean(axis=0)
    return float(np.abs(X.T @ resid).max() / len(y))


def _null_solution(Y: np.ndarray, p: int, lam: float) -> CoefficientMatrix:
    freq = Y.mean(axis=0)
    b = np.log(freq)
    b -= b.mean()
    return CoefficientMatrix(intercepts=b, slopes=np.zeros((p, len(freq))), lam=lam)


def _objective(ETA, Y, yidx, B, lam) -> float:
    _, denom, rowmax = _exact_softmax(ETA)
    nll = float((np.log(denom) + rowmax - ETA[np.arange(len(Y)), yidx]).mean())
    return nll + lam * float(np.abs(B).sum())


def _kkt_residual(XF, Y, ETA, B, lam) -> float:
    E, denom, _ = _exact_softmax(ETA)
    R = Y - E / denom[:, None]
    score = XF.T @ R / len(Y)
    active = B != 0
    resid = float(np.abs(R.mean(axis=0)).max())  # intercept stationarity
    if active.any():
        resid = max(resid, float(np.abs(score[active] - lam * np.sign(B[active])).max()))
    if (~active).any():
        resid = max(resid, float(np.maximum(np.abs(score[~active]) - lam, 0.0).max()))
    return resid


def _nll(ETA, yidx) -> float:
    _, denom, rowmax = _exact_softmax(ETA)
    return float((np.log(denom) + rowmax - ETA[np.arange(len(ETA)), yidx]).mean())


def _solve_one(XF, Y, lam, B, b, tol, max_sweeps, trace) -> tuple[int, float]:
    """Block coordinate descent at one lambda, warm-started in place on (B, b)."""
    n, K = Y.shape
    p = XF.shape[1]
    rows = np.arange(n)
    cols = [np.ascontiguousarray(XF[:, j]) for j in range(p)]
    sq = [c * c for c in cols]
    # global spectral bound: the class-covariance block Hessian is at most
    # (sum x^2 / 2n) times the identity, so steps there always descend.
    # Pointwise the Hessian is also dominated by the per-class diagonal
    # 2 sum x^2 p(1-p) / n (tight along competing-pair directions), which is
    # far smaller where fits are confident; steps use it, floored against
    # noise amplification, and a descent test escalates toward the spectral
    # cap on the occasional overshoot.
    h_cap = np.array([max(float(c @ c), 1e-300) / (2.0 * n) for c in cols])
    XtY = np.array([c @ Y for c in cols])  # (p, K), constant over the solve
    ysum = Y.sum(axis=0)
    yidx = np.argmax(Y, axis=1)

    ETA = b[None, :] + XF @ B
    prev_obj = _objective(ETA, Y, yidx, B, lam)
    trace.append(prev_obj)

    def update_block(j: int) -> float:
        """Proximal step on covariate j across all classes, then the
        penalty-minimizing shift along its invariance direction."""
        nonlocal ETA
        E, denom, rowmax = _exact_softmax(ETA)
        P = E / denom[:, None]
        xj = cols[j]
        g = (xj @ P - XtY[j]) / n
        nll_old = float((np.log(denom) + rowmax - ETA[rows, yidx]).mean())
        h = np.maximum(2.0 * (sq[j] @ (P * (1.0 - P))) / n, 1e-4 * h_cap[j])
        while True:
            u = B[j] - g / h
            prox = np.sign(u) * np.maximum(np.abs(u) - lam / h, 0.0)
            # median shift: probabilities are invariant, the penalty is not
            c = float(np.sort(prox)[(K - 1) // 2])
            new = prox - c if c != 0.0 and np.abs(prox - c).sum() < np.abs(prox).sum() else prox
            d = new - B[j]
            md = float(np.abs(d).max())
            if md == 0.0:
                return 0.0
            ETA2 = ETA + xj[:, None] * d[None, :]
            dprox = prox - B[j]
            bound = nll_old + float(g @ dprox) + 0.5 * float(h @ (dprox * dprox))
            if _nll(ETA2, yidx) <= bound + 1e-12 * (1.0 + abs(nll_old)) or np.all(
                h >= h_cap[j]
            ):
                B[j] = new
                ETA = ETA2
                return md
            h = np.minimum(h * 2.0, h_cap[j])

    def update_intercepts() -> float:
        nonlocal ETA, b
        E, denom, rowmax = _exact_softmax(ETA)
        P = E / denom[:, None]
        g = (P.sum(axis=0) - ysum) / n
        nll_old = float((np.log(denom) + rowmax - ETA[rows, yidx]).mean())
        h = np.maximum(2.0 * (P * (1.0 - P)).sum(axis=0) / n, 1e-4 * 0.5)
        while True:
            d = -g / h
            d -= (b + d).mean()  # keep the free direction pinned at mean zero
            md = float(np.abs(d).max())
            if md == 0.0:
                return 0.0
            ETA2 = ETA + d[None, :]
            bound = nll_old + float(g @ d) + 0.5 * float(h @ (d * d))
            if _nll(ETA2, yidx) <= bound + 1e-12 * (1.0 + abs(nll_old)) or np.all(h >= 0.5):
                b += d
                ETA = ETA2
                return md
            h = np.minimum(h * 2.0, 0.5)

    def sweep(features) -> float:
        nonlocal ETA, prev_obj
        maxd = update_intercepts()
        for j in features:
            maxd = max(maxd, update_block(j))
        ETA = b[None, :] + XF @ B  # refresh accumulated state
        obj = _objective(ETA, Y, yidx, B, lam)
        assert obj <= prev_obj + 1e-9 * (1.0 + abs(prev_obj)), (
            f"objective rose from {prev_obj!r} to {obj!r}"
        )
        prev_obj = obj
        trace.append(obj)
        return maxd

    # adaptive steps amplify float-level gradient noise into micro-moves, so
    # coefficient change alone cannot certify convergence; the KKT residual can
    all_features = list(range(p))
    sweeps = 0
    gamma_start = 1.0
    while sweeps < max_sweeps:
        B0 = B.copy()
        b0 = b.copy()
        sweep(all_features)
        sweeps += 1
        resid = _kkt_residual(XF, Y, ETA, B, lam)
        if resid <= tol:
            return sweeps, resid
        # near the unpenalized end of the path plain sweeps contract along one
        # slow geometric mode; extrapolating the sweep displacement while the
        # exact objective keeps falling removes that mode at trivial cost
        dB = B - B0
        db = b - b0
        dETA = db[None, :] + XF @ dB
        gamma, best, ETA_best = 0.0, prev_obj, None
        gtry, rising = gamma_start, False
        for _ in range(16):
            ETAt = ETA + gtry * dETA
            objt = _objective(ETAt, Y, yidx, B + gtry * dB, lam)
            if objt < best:
                gamma, best, ETA_best = gtry, objt, ETAt
                gtry, rising = gtry * 2.0, True
            elif rising or gtry <= 1.0:
                break
            else:
                gtry /= 2.0  # the remembered extrapolation overshot this sweep
        if gamma > 0.0:
            B += gamma * dB
            b += gamma * db
            ETA = ETA_best
            prev_obj = best
            trace.append(best)
            gamma_start = gamma
        else:
            gamma_start = 1.0
    raise NonConvergence(lam, sweeps)


def _lambda_grid(lam_max: float, n_lambda: int, lambda_min_ratio: float) -> np.ndarray:
    if lam_max <= 0:
        return np.array([0.0])
    grid = lam_max * np.exp(
        np.linspace(0.0, np.log(lambda_min_ratio), n_lambda)
    )
    grid[0] = lam_max
    return grid


def fit(
    X,
    y,
    lambdas=None,
    n_lambda: int = 100,
    lambda_min_ratio: float = 1e-3,
    tol: float = 1e-7,
    max_sweeps: int = 10_000,
) -> LassoFit:
    """Fit the penalized multinomial model along a lambda path.

    ``X`` may be a DesignMatrix or a plain matrix. The path defaults to
    ``n_lambda`` log-spaced points from lambda_max down to
    ``lambda_min_ratio * lambda_max``; pass ``lambdas`` to override. Points
    at or above lambda_max return the exact intercept-only solution. A path
    point is converged once its stationarity residual is at most ``tol``.

    Raises NonConvergence when a path point exhausts ``max_sweeps``.
    """
    names = None
    standardization = None
    if isinstance(X, DesignMatrix):
        names = list(X.feature_names)
        standardization = X.standardization
        X = X.X
    X, y, classes = _validate_xy(X, y)
    n, p = X.shape
    K = len(classes)
    Y = _one_hot(y, classes)
    lam_max_local = float(np.abs(X.T @ (Y - Y.mean(axis=0))).max() / n)

    if lambdas is None:
        grid = _lambda_grid(lam_max_local, n_lambda, lambda_min_ratio)
    else:
        grid = np.sort(np.asarray(lambdas, dtype=float))[::-1].copy()
        if len(grid) == 0 or grid[-1] < 0 or not np.all(np.isfinite(grid)):
            raise ValidationError("lambdas must be finite and non-negative")

    XF = np.asfortranarray(X)
    result = LassoFit(
        lambdas=grid,
        path=[],
        classes=classes,
        feature_names=names,
        standardization=standardization,
    )
    B = np.zeros((p, K))
    b = _null_solution(Y, p, 0.0).intercepts.copy()
    for lam in grid:
        lam = float(lam)
        if lam >= lam_max_local:
            null = _null_solution(Y, p, lam)
            result.path.append(null)
            result.sweeps.append(0)
            result.kkt_residuals.append(0.0)
            result.objective_traces.append([])
            # warm state stays at the null for the next path point
            B = np.zeros((p, K))
            b = null.intercepts.copy()
            continue
        trace: list[float] = []
        sweeps, resid = _solve_one(XF, Y, lam, B, b, tol, max_sweeps, trace)
        bc = b - b.mean()  # report with mean-zero intercepts; probabilities unchanged
        result.path.append(
            CoefficientMatrix(intercepts=bc, slopes=B.copy(), lam=lam)
        )
        result.sweeps.append(sweeps)
        result.kkt_residuals.append(resid)
        result.objective_traces.append(trace)
    return result


def predict_proba(coefs: CoefficientMatrix, X) -> np.ndarray:
    """Class probabilities for rows of X (standardized covariate space)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p = coefs.slopes.shape[0]
    if X.shape[1] != p:
        raise DimensionMismatch(f"X has {X.shape[1]} columns, model has {p}")
    ETA = coefs.intercepts[None, :] + X @ coefs.slopes
    E, denom = _clip_softmax(ETA)
    return E / denom[:, None]


def probability_curves(
    coefs: CoefficientMatrix, var_index: int, grid, baseline=None
) -> np.ndarray:
    """Predicted class probabilities as one covariate moves along ``grid``.

    All other covariates sit at ``baseline`` (default: zero, i.e. the mean
    in standardized space). Returns a (len(grid), K) array.
    """
    p = coefs.slopes.shape[0]
    if not 0 <= var_index < p:
        raise DimensionMismatch(f"var_index {var_index} outside 0..{p - 1}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValidationError("grid must be a non-empty vector")
    base = np.zeros(p) if baseline is None else np.asarray(baseline, dtype=float)
    if base.shape != (p,):
        raise DimensionMismatch("baseline must have one entry per covariate")
    X = np.tile(base, (len(grid), 1))
    X[:, var_index] = grid
    return predict_proba(coefs, X)


def contrasts_vs_reference(coefs: CoefficientMatrix, ref_index: int) -> CoefficientMatrix:
    """Re-express coefficients relative to one class (its column becomes 0).

    Contrasts leave fitted probabilities unchanged and make per-class
    effects readable as log-odds against the reference.
    """
    K = coefs.slopes.shape[1]
    if not 0 <= ref_index < K:
        raise BadReference(ref_index, K)
    return CoefficientMatrix(
        intercepts=coefs.intercepts - coefs.intercepts[ref_index],
        slopes=coefs.slopes - coefs.slopes[:, ref_index : ref_index + 1],
        lam=coefs.lam,
    )


@dataclass(frozen=True)
class CvResult:
    lambda_: float
    index: int
    lambdas: np.ndarray
    mean_deviance: np.ndarray
    fold_sizes: list[int]


def cv_lambda(
    X,
    y,
    n_folds: int = 5,
    seed=0,
    n_lambda: int = 100,
    lambda_min_ratio: float = 1e-3,
    **fit_kwargs,
) -> CvResult:
    """Pick lambda by K-fold cross-validated multinomial deviance.

    Folds are stratified per class (shuffled round-robin), the lambda grid
    comes from the full data, and the winner is the grid point with the
    lowest pooled deviance; ties resolve toward the stronger penalty.
    """
    if isinstance(X, DesignMatrix):
        X = X.X
    X, y, classes = _validate_xy(X, y)
    if n_folds < 2:
        raise ValidationError("need at least 2 folds")
    # held-out deviance is insensitive at this resolution, so fold fits may
    # stop earlier than the reported full-data fit
    fit_kwargs.setdefault("tol", 1e-5)
    counts = {c: int((y == c).sum()) for c in classes}
    thin = [str(c) for c, m in counts.items() if m < 2]
    if thin:
        raise FoldTooSmall(f"classes with fewer than 2 members: {', '.join(thin)}")

    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    for c in classes:
        idx = np.nonzero(y == c)[0]
        perm = rng.permutation(len(idx))
        fold_of[idx[perm]] = np.arange(len(idx)) % n_folds

    Y = _one_hot(y, classes)
    lam_max_full = float(np.abs(X.T @ (Y - Y.mean(axis=0))).max() / len(y))
    grid = _lambda_grid(lam_max_full, n_lambda, lambda_min_ratio)

    total_dev = np.zeros(len(grid))
    fold_sizes = []
    for f in range(n_folds):
        val = fold_of == f
        if not val.any():
            fold_sizes.append(0)
            continue
        fold_sizes.append(int(val.sum()))
        train_fit = fit(X[~val], y[~val], lambdas=grid, **fit_kwargs)
        yv = np.searchsorted(classes, y[val])
        for li, coefs in enumerate(train_fit.path):
            P = predict_proba(coefs, X[val])
            total_dev[li] += -2.0 * float(np.log(P[np.arange(val.sum()), yv]).sum())
    mean_dev = total_dev / len(y)
    index = int(np.argmin(mean_dev))  # first minimum = largest lambda on ties
    return CvResult(
        lambda_=float(grid[index]),
        index=index,
        lambdas=grid,
        mean_deviance=mean_dev,
        fold_sizes=fold_sizes,
    )
