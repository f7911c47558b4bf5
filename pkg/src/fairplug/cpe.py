"""Class-probability estimation by regularized logistic ERM.

The decision rules consume two kinds of conditional-probability models:
``eta`` estimating P(Y = +1 | inputs) and ``eta_bar`` estimating
P(Ybar = +1 | inputs).  All of them are linear-logistic models

    p(z) = sigmoid(w . [z; 1])

fitted by minimizing the regularized empirical risk

    J(w) = (1/n) sum_i log(1 + exp(-t_i * w . [z_i; 1])) + (L/2) ||w||^2

with the natural-log logistic loss (whose derivative magnitude is
bounded by 1, a property the privacy analysis relies on) and a ridge
penalty of strength ``lambda_reg``.  The intercept IS regularized by
default so the penalty is 1-strongly convex over the full parameter
vector -- the privacy guarantee needs exactly that; pass
``regularize_intercept=False`` to get the usual statistical convention
instead (at the cost of that guarantee).

The optimizer is deterministic full-batch gradient descent with Armijo
backtracking, started from the zero vector: the objective is smooth and
strictly convex for ``lambda_reg > 0``, so the minimizer is unique and
golden tests are reproducible.

Four thin wrappers fit the specific estimators the decision rules need:

* :func:`fit_eta`           -- P(Y=+1 | x)            on (features, labels)
* :func:`fit_eta_bar_eo`    -- P(Ybar=+1 | x, y)      on ((features, label), sensitive)
* :func:`fit_eta_bar_dpar`  -- P(Ybar=+1 | x)         on (features, sensitive)
* :func:`fit_eta_aware`     -- P(Y=+1 | x, ybar)      on ((features, sensitive), labels)

The label column fed to :func:`fit_eta_bar_eo` is the *stored* label
encoding (so ``{-C, +C}`` after privacy preprocessing), which is what
keeps the joint input under the preprocessing norm bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Dataset
from .errors import DataError, NumericError, ValidationError
from .kvformat import format_float, format_float_vector, parse_float_vector, read_kv, write_kv

__all__ = [
    "ARITY_FEATURES",
    "ARITY_FEATURES_PLUS_LABEL",
    "ARITY_FEATURES_PLUS_SENSITIVE",
    "ARITIES",
    "LinearCpe",
    "FitConfig",
    "fit",
    "predict_proba",
    "fit_eta",
    "fit_eta_bar_eo",
    "fit_eta_bar_dpar",
    "fit_eta_aware",
    "save_cpe",
    "load_cpe",
    "sigmoid",
]

logger = logging.getLogger(__name__)

ARITY_FEATURES = "features-only"
ARITY_FEATURES_PLUS_LABEL = "features-plus-label"
ARITY_FEATURES_PLUS_SENSITIVE = "features-plus-sensitive"
ARITIES = (ARITY_FEATURES, ARITY_FEATURES_PLUS_LABEL, ARITY_FEATURES_PLUS_SENSITIVE)


def sigmoid(z):
    """Numerically stable logistic link, elementwise."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True, eq=False)
class LinearCpe:
    """A fitted linear-logistic class-probability estimator.

    ``weights`` has length (input dimension + 1); the **last** entry is
    the intercept.  ``input_arity`` declares the input layout the model
    expects, so rules can verify they are wiring the right estimator
    into the right slot.  ``grad_norm``/``n_iters`` record the fit
    residual for diagnostics; they are metadata, not part of the model
    identity, and are not persisted.
    """

    weights: np.ndarray
    lambda_reg: float
    input_arity: str
    grad_norm: float | None = None
    n_iters: int | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValidationError(
                f"weights must be a 1-D vector of length >= 2, got shape {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights contain non-finite entries")
        if self.input_arity not in ARITIES:
            raise ValidationError(
                f"unknown input_arity {self.input_arity!r}; expected one of {ARITIES}"
            )
        lam = float(self.lambda_reg)
        if not (np.isfinite(lam) and lam >= 0.0):
            raise ValidationError(f"lambda_reg must be a finite real >= 0, got {lam}")
        w = np.array(w, copy=True)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "lambda_reg", lam)

    @property
    def in_dim(self) -> int:
        """Expected input vector length (intercept excluded)."""
        return int(self.weights.size - 1)


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameters for :func:`fit`.

    ``seed`` is carried for config plumbing and forward compatibility;
    the deterministic optimizer itself does not consume randomness.
    """

    lambda_reg: float = 1e-2
    max_iters: int = 500
    tolerance: float = 1e-6
    seed: int = 0
    regularize_intercept: bool = True

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lambda_reg) and self.lambda_reg >= 0.0):
            raise ValidationError(f"lambda_reg must be >= 0, got {self.lambda_reg}")
        if int(self.max_iters) < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (np.isfinite(self.tolerance) and self.tolerance > 0.0):
            raise ValidationError(f"tolerance must be > 0, got {self.tolerance}")


def _design(rows: np.ndarray) -> np.ndarray:
    return np.hstack([rows, np.ones((rows.shape[0], 1))])


def _objective_and_grad(w, design, targets, lambda_reg, reg_mask):
    n = design.shape[0]
    margins = targets * (design @ w)
    # log(1 + exp(-m)) via logaddexp for stability at large |m|
    obj = float(np.logaddexp(0.0, -margins).mean()) + 0.5 * lambda_reg * float(
        np.dot(w * reg_mask, w * reg_mask)
    )
    # d/dm log(1+exp(-m)) = -sigmoid(-m); |.| <= 1 always
    coef = -targets * sigmoid(-margins)
    grad = design.T @ coef / n + lambda_reg * (reg_mask * w)
    return obj, grad


def fit(rows, targets, config: FitConfig, *, init=None) -> LinearCpe:
    """Minimize the regularized logistic objective on (rows, targets).

    Parameters
    ----------
    rows : (n, k) design matrix (intercept column appended internally).
    targets : (n,) vector over {-1, +1}; both classes must be present.
    config : optimization hyperparameters.
    init : optional (k+1,) starting point (defaults to zeros); exposed so
        convexity can be probed by refitting from random starts.

    Returns
    -------
    LinearCpe with ``input_arity = 'features-only'`` (callers re-tag via
    the specific ``fit_*`` wrappers) whose gradient norm at the returned
    weights is <= ``config.tolerance``, or the ``max_iters`` iterate with
    the achieved residual recorded in ``grad_norm``.
    """

    rows = np.asarray(rows, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise ValidationError(f"rows must be a non-empty 2-D matrix, got shape {rows.shape}")
    if targets.shape != (rows.shape[0],):
        raise ValidationError(
            f"targets shape {targets.shape} does not match {rows.shape[0]} rows"
        )
    if not np.all(np.isfinite(rows)):
        raise ValidationError("rows contain non-finite entries")
    if not np.all(np.isin(targets, (-1.0, 1.0))):
        raise ValidationError("targets must take values -1 or +1")
    if np.all(targets > 0) or np.all(targets < 0):
        raise ValidationError("targets contain a single class; both classes are required")

    design = _design(rows)
    k = design.shape[1]
    reg_mask = np.ones(k)
    if not config.regularize_intercept:
        reg_mask[-1] = 0.0

    if init is None:
        w = np.zeros(k)
    else:
        w = np.array(init, dtype=float, copy=True)
        if w.shape != (k,):
            raise ValidationError(f"init must have shape ({k},), got {w.shape}")

    lam = float(config.lambda_reg)
    obj, grad = _objective_and_grad(w, design, targets, lam, reg_mask)
    if not np.isfinite(obj):
        raise NumericError("objective is non-finite at the starting point")

    step = 1.0
    grad_norm = float(np.linalg.norm(grad))
    iters = 0
    for iters in range(1, int(config.max_iters) + 1):
        if grad_norm <= config.tolerance:
            iters -= 1
            break
        # Armijo backtracking: shrink until sufficient decrease holds.
        g2 = grad_norm * grad_norm
        step = min(step * 2.0, 1e4)
        while True:
            w_new = w - step * grad
            obj_new, grad_new = _objective_and_grad(w_new, design, targets, lam, reg_mask)
            if np.isfinite(obj_new) and obj_new <= obj - 1e-4 * step * g2:
                break
            step *= 0.5
            if step < 1e-18:
                raise NumericError(
                    "line search failed: no admissible step (objective may be non-smooth "
                    "due to exploding inputs)"
                )
        w, obj, grad = w_new, obj_new, grad_new
        grad_norm = float(np.linalg.norm(grad))
    if grad_norm > config.tolerance:
        logger.debug(
            "fit stopped at max_iters=%d with residual gradient norm %.3e",
            config.max_iters,
            grad_norm,
        )
    return LinearCpe(
        weights=w,
        lambda_reg=lam,
        input_arity=ARITY_FEATURES,
        grad_norm=grad_norm,
        n_iters=iters,
    )


def predict_proba(model: LinearCpe, inputs):
    """sigmoid(w . [inputs; 1]) for a single vector or a stack of rows.

    Accepts a length-``in_dim`` vector (returns a float) or an
    ``(n, in_dim)`` matrix (returns an ``(n,)`` array).  Outputs lie
    strictly inside (0, 1) up to floating-point rounding.
    """

    x = np.asarray(inputs, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.in_dim:
        raise ValidationError(
            f"input dimension {x.shape[-1] if x.ndim else '?'} does not match "
            f"model arity {model.input_arity!r} (expects {model.in_dim})"
        )
    z = x @ model.weights[:-1] + model.weights[-1]
    p = sigmoid(z)
    return float(p[0]) if single else p


def _retag(model: LinearCpe, arity: str) -> LinearCpe:
    return LinearCpe(
        weights=model.weights,
        lambda_reg=model.lambda_reg,
        input_arity=arity,
        grad_norm=model.grad_norm,
        n_iters=model.n_iters,
    )


def fit_eta(dataset: Dataset, config: FitConfig) -> LinearCpe:
    """Fit P(Y=+1 | x) on (features, labels)."""
    return fit(dataset.features, np.sign(dataset.labels), config)


def fit_eta_bar_eo(dataset: Dataset, config: FitConfig) -> LinearCpe:
    """Fit P(Ybar=+1 | x, y) on ((features, stored label), sensitive).

    The label column uses the stored encoding (+-1, or +-C after privacy
    preprocessing) so the joint input stays inside the preprocessing
    norm bound.
    """
    rows = np.hstack([dataset.features, dataset.labels[:, None]])
    return _retag(fit(rows, np.sign(dataset.sensitive), config), ARITY_FEATURES_PLUS_LABEL)


def fit_eta_bar_dpar(dataset: Dataset, config: FitConfig) -> LinearCpe:
    """Fit P(Ybar=+1 | x) on (features, sensitive)."""
    return fit(dataset.features, np.sign(dataset.sensitive), config)


def fit_eta_aware(dataset: Dataset, config: FitConfig) -> LinearCpe:
    """Fit P(Y=+1 | x, ybar) on ((features, sensitive), labels)."""
    rows = np.hstack([dataset.features, dataset.sensitive[:, None]])
    return _retag(fit(rows, np.sign(dataset.labels), config), ARITY_FEATURES_PLUS_SENSITIVE)


def save_cpe(model: LinearCpe, path: str | Path) -> None:
    """Persist a model as a flat text record (arity, strength, weights)."""
    write_kv(
        path,
        [
            ("arity", model.input_arity),
            ("lambda_reg", format_float(model.lambda_reg)),
            ("weights", format_float_vector(model.weights)),
        ],
    )


def load_cpe(path: str | Path) -> LinearCpe:
    """Inverse of :func:`save_cpe` (full-precision round trip)."""
    record = read_kv(path)
    try:
        arity = record["arity"]
        lambda_reg = float(record["lambda_reg"])
        weights = parse_float_vector(record["weights"])
    except KeyError as exc:
        raise DataError(f"{path}: missing model field {exc}") from exc
    return LinearCpe(weights=np.array(weights), lambda_reg=lambda_reg, input_arity=arity)
