"""The four plug-in decision rules: score functions and sign thresholding.

Each fairness setting has a closed-form optimal score; a plug-in rule
substitutes estimated regression functions (and the estimated positive
prior where needed) into that score and classifies by its sign:

* ``eo-blind``    s(x)       = {1 - (lam/pi)(eta_bar(x, +1) - c_bar)} eta(x) - c
* ``eo-aware``    s(x, -1)   = {1 + (lam/pi) c_bar} eta(x, -1) - c
                  s(x, +1)   = {1 - (lam/pi)(1 - c_bar)} eta(x, +1) - c
* ``dpar-blind``  s(x)       = eta(x) - {c + lam (eta_bar(x) - c_bar)}
* ``dpar-aware``  s(x, ybar) = eta(x, ybar) - c + lam c_bar - lam 1{ybar = +1}

The classifier is +1 when the score is strictly positive and -1
otherwise; a score of exactly 0 classifies as -1 (the zero-height
Heaviside convention).

Blind rules carry two estimators (``eta`` on features, ``eta_bar`` on
features or features-plus-label); aware rules carry a single estimator
over (features, sensitive).  EO rules additionally carry ``pi_hat``,
always estimated on the *training* split.  The EO-blind rule evaluates
``eta_bar`` at the positive label input; :attr:`PlugInRule.positive_label`
records which stored encoding that is (+1 normally, +C after privacy
preprocessing).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .core import Dataset, FairnessParams, compute_dist_stats
from .cpe import (
    ARITY_FEATURES,
    ARITY_FEATURES_PLUS_LABEL,
    ARITY_FEATURES_PLUS_SENSITIVE,
    FitConfig,
    LinearCpe,
    fit_eta,
    fit_eta_aware,
    fit_eta_bar_dpar,
    fit_eta_bar_eo,
    predict_proba,
)
from .errors import DataError, ValidationError
from .kvformat import format_float, format_float_vector, parse_float_vector, read_kv, write_kv

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .privacy import PrivatizedCpe

__all__ = [
    "EO_BLIND",
    "EO_AWARE",
    "DPAR_BLIND",
    "DPAR_AWARE",
    "SETTINGS",
    "is_aware",
    "is_eo",
    "criterion_for",
    "PlugInRule",
    "score_eo_blind",
    "score_eo_aware",
    "score_dpar_blind",
    "score_dpar_aware",
    "score",
    "classify",
    "fit_plugin",
    "with_params",
    "save_rule",
    "load_rule",
]

EO_BLIND = "eo-blind"
EO_AWARE = "eo-aware"
DPAR_BLIND = "dpar-blind"
DPAR_AWARE = "dpar-aware"
SETTINGS = (EO_BLIND, EO_AWARE, DPAR_BLIND, DPAR_AWARE)


def _check_setting(setting: str) -> str:
    if setting not in SETTINGS:
        raise ValidationError(f"unknown setting {setting!r}; expected one of {SETTINGS}")
    return setting


def is_aware(setting: str) -> bool:
    """Whether the sensitive attribute is an input at prediction time."""
    return _check_setting(setting) in (EO_AWARE, DPAR_AWARE)


def is_eo(setting: str) -> bool:
    """Whether the setting targets equal opportunity (else demographic parity)."""
    return _check_setting(setting) in (EO_BLIND, EO_AWARE)


def criterion_for(setting: str) -> str:
    """Performance-measure criterion tag ('eo' or 'dpar') for a setting."""
    return "eo" if is_eo(setting) else "dpar"


def _check_unit(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError(f"{name} must lie in [0, 1]")
    return arr


def _check_pi(pi: float) -> float:
    pi = float(pi)
    if not (np.isfinite(pi) and 0.0 < pi <= 1.0):
        raise ValidationError(f"pi must lie in (0, 1], got {pi}")
    return pi


def _check_group(y_bar) -> np.ndarray:
    arr = np.asarray(y_bar, dtype=float)
    if not np.all(np.isin(arr, (-1.0, 1.0))):
        raise ValidationError("y_bar must be -1 or +1")
    return arr


def _scalar_or_array(value: np.ndarray, scalar: bool):
    return float(value) if scalar else value


def score_eo_blind(eta_x, eta_bar_x1, pi: float, params: FairnessParams):
    """Equal-opportunity score without test-time group access.

    ``eta_bar_x1`` is the sensitive-attribute estimator evaluated at the
    positive label input.  Scalar in, scalar out; arrays broadcast.
    """

    scalar = np.ndim(eta_x) == 0 and np.ndim(eta_bar_x1) == 0
    eta_x = _check_unit("eta_x", eta_x)
    eta_bar_x1 = _check_unit("eta_bar_x1", eta_bar_x1)
    pi = _check_pi(pi)
    value = (1.0 - (params.lam / pi) * (eta_bar_x1 - params.c_bar)) * eta_x - params.c
    return _scalar_or_array(value, scalar)


def score_eo_aware(eta_xy, y_bar, pi: float, params: FairnessParams):
    """Equal-opportunity score with test-time group access (two branches)."""
    scalar = np.ndim(eta_xy) == 0 and np.ndim(y_bar) == 0
    eta_xy = _check_unit("eta_xy", eta_xy)
    y_bar = _check_group(y_bar)
    pi = _check_pi(pi)
    coef_minus = 1.0 + (params.lam / pi) * params.c_bar
    coef_plus = 1.0 - (params.lam / pi) * (1.0 - params.c_bar)
    value = np.where(y_bar > 0, coef_plus, coef_minus) * eta_xy - params.c
    return _scalar_or_array(value, scalar)


def score_dpar_blind(eta_x, eta_bar_x, params: FairnessParams):
    """Demographic-parity score without test-time group access."""
    scalar = np.ndim(eta_x) == 0 and np.ndim(eta_bar_x) == 0
    eta_x = _check_unit("eta_x", eta_x)
    eta_bar_x = _check_unit("eta_bar_x", eta_bar_x)
    value = eta_x - (params.c + params.lam * (eta_bar_x - params.c_bar))
    return _scalar_or_array(value, scalar)


def score_dpar_aware(eta_xy, y_bar, params: FairnessParams):
    """Demographic-parity score with test-time group access."""
    scalar = np.ndim(eta_xy) == 0 and np.ndim(y_bar) == 0
    eta_xy = _check_unit("eta_xy", eta_xy)
    y_bar = _check_group(y_bar)
    value = (
        eta_xy - params.c + params.lam * params.c_bar - params.lam * (y_bar > 0)
    )
    return _scalar_or_array(value, scalar)


@dataclass(frozen=True, eq=False)
class PlugInRule:
    """A fitted decision rule: setting tag, parameters, and estimators.

    ``pi_hat`` is required by the EO settings and ignored by the DPar
    ones.  Blind settings require ``eta_bar``; aware settings require a
    single ``eta`` over (features, sensitive) and no ``eta_bar``.
    ``privacy`` optionally carries the privatization record when the
    rule came out of the private pipeline.
    """

    setting: str
    params: FairnessParams
    eta: LinearCpe
    eta_bar: LinearCpe | None = None
    pi_hat: float | None = None
    positive_label: float = 1.0
    privacy: "PrivatizedCpe | None" = None

    def __post_init__(self) -> None:
        _check_setting(self.setting)
        if not isinstance(self.params, FairnessParams):
            raise ValidationError("params must be FairnessParams")
        if not isinstance(self.eta, LinearCpe):
            raise ValidationError("eta must be a LinearCpe")
        if is_eo(self.setting):
            if self.pi_hat is None:
                raise ValidationError(f"setting {self.setting!r} requires pi_hat")
            _check_pi(self.pi_hat)
        if is_aware(self.setting):
            if self.eta_bar is not None:
                raise ValidationError(
                    f"setting {self.setting!r} uses a single (x, ybar) estimator; "
                    "eta_bar must be absent"
                )
            if self.eta.input_arity != ARITY_FEATURES_PLUS_SENSITIVE:
                raise ValidationError(
                    f"setting {self.setting!r} requires eta with arity "
                    f"{ARITY_FEATURES_PLUS_SENSITIVE!r}, got {self.eta.input_arity!r}"
                )
        else:
            if self.eta_bar is None:
                raise ValidationError(f"setting {self.setting!r} requires eta_bar")
            if self.eta.input_arity != ARITY_FEATURES:
                raise ValidationError(
                    f"setting {self.setting!r} requires eta with arity "
                    f"{ARITY_FEATURES!r}, got {self.eta.input_arity!r}"
                )
            expected = (
                ARITY_FEATURES_PLUS_LABEL if self.setting == EO_BLIND else ARITY_FEATURES
            )
            if self.eta_bar.input_arity != expected:
                raise ValidationError(
                    f"setting {self.setting!r} requires eta_bar with arity "
                    f"{expected!r}, got {self.eta_bar.input_arity!r}"
                )
        scale = float(self.positive_label)
        if not (np.isfinite(scale) and scale > 0):
            raise ValidationError(f"positive_label must be positive, got {scale}")
        object.__setattr__(self, "positive_label", scale)


def _as_rows(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise ValidationError(f"x must be a vector or a matrix, got ndim={arr.ndim}")


def score(rule: PlugInRule, x, y_bar=None):
    """Evaluate the rule's score at feature vector(s) ``x``.

    ``y_bar`` (scalar or per-row vector over +-1) is required exactly for
    the aware settings.  Returns a float for a single vector, an array
    for a matrix of rows.
    """

    rows, single = _as_rows(x)
    aware = is_aware(rule.setting)
    if aware and y_bar is None:
        raise ValidationError(f"setting {rule.setting!r} requires y_bar at prediction time")
    if not aware and y_bar is not None:
        raise ValidationError(f"setting {rule.setting!r} does not accept y_bar")

    if aware:
        groups = _check_group(y_bar)
        groups = np.broadcast_to(groups, (rows.shape[0],)).astype(float)
        inputs = np.hstack([rows, groups[:, None]])
        eta_xy = np.atleast_1d(predict_proba(rule.eta, inputs))
        if rule.setting == EO_AWARE:
            value = score_eo_aware(eta_xy, groups, rule.pi_hat, rule.params)
        else:
            value = score_dpar_aware(eta_xy, groups, rule.params)
    else:
        eta_x = np.atleast_1d(predict_proba(rule.eta, rows))
        if rule.setting == EO_BLIND:
            label_col = np.full((rows.shape[0], 1), rule.positive_label)
            eta_bar_x1 = np.atleast_1d(
                predict_proba(rule.eta_bar, np.hstack([rows, label_col]))
            )
            value = score_eo_blind(eta_x, eta_bar_x1, rule.pi_hat, rule.params)
        else:
            eta_bar_x = np.atleast_1d(predict_proba(rule.eta_bar, rows))
            value = score_dpar_blind(eta_x, eta_bar_x, rule.params)
    value = np.asarray(value, dtype=float)
    return float(value[0]) if single else value


def classify(rule: PlugInRule, x, y_bar=None):
    """Sign-threshold the score: +1 iff score > 0, else -1 (ties to -1)."""
    s = score(rule, x, y_bar)
    if np.ndim(s) == 0:
        return 1 if s > 0 else -1
    return np.where(np.asarray(s) > 0, 1, -1)


def fit_plugin(
    train: Dataset,
    setting: str,
    params: FairnessParams,
    config: FitConfig,
    *,
    pi_override: float | None = None,
) -> PlugInRule:
    """Fit the estimators a setting needs on the training split.

    ``pi_override`` substitutes a known true prior for the empirical
    one (EO settings only), for harnesses that study the known-prior
    regime.
    """

    _check_setting(setting)
    pi_hat: float | None = None
    if is_eo(setting):
        pi_hat = float(pi_override) if pi_override is not None else compute_dist_stats(train).pi
    if is_aware(setting):
        eta = fit_eta_aware(train, config)
        eta_bar = None
    else:
        eta = fit_eta(train, config)
        eta_bar = fit_eta_bar_eo(train, config) if setting == EO_BLIND else fit_eta_bar_dpar(
            train, config
        )
    return PlugInRule(
        setting=setting,
        params=params,
        eta=eta,
        eta_bar=eta_bar,
        pi_hat=pi_hat,
        positive_label=train.label_scale,
    )


def with_params(rule: PlugInRule, params: FairnessParams) -> PlugInRule:
    """Re-assemble the rule with new (lam, c, c_bar), reusing its estimators.

    Re-assembly is pure post-processing: no data access, and -- for
    privatized rules -- no additional noise or budget.
    """

    return replace(rule, params=params)


def _cpe_items(prefix: str, model: LinearCpe):
    return [
        (f"{prefix}.arity", model.input_arity),
        (f"{prefix}.lambda_reg", format_float(model.lambda_reg)),
        (f"{prefix}.weights", format_float_vector(model.weights)),
    ]


def save_rule(rule: PlugInRule, path: str | Path) -> None:
    """Persist the rule as a flat text record with embedded estimators.

    The privatization record, when present, is saved separately by the
    privacy module; this record captures the decision rule itself.
    """

    items: list[tuple[str, str]] = [
        ("setting", rule.setting),
        ("lambda", format_float(rule.params.lam)),
        ("c", format_float(rule.params.c)),
        ("c_bar", format_float(rule.params.c_bar)),
        ("positive_label", format_float(rule.positive_label)),
    ]
    if rule.pi_hat is not None:
        items.append(("pi_hat", format_float(rule.pi_hat)))
    items.extend(_cpe_items("eta", rule.eta))
    if rule.eta_bar is not None:
        items.extend(_cpe_items("eta_bar", rule.eta_bar))
    write_kv(path, items)


def _cpe_from_record(record: dict[str, str], prefix: str) -> LinearCpe:
    return LinearCpe(
        weights=np.array(parse_float_vector(record[f"{prefix}.weights"])),
        lambda_reg=float(record[f"{prefix}.lambda_reg"]),
        input_arity=record[f"{prefix}.arity"],
    )


def load_rule(path: str | Path) -> PlugInRule:
    """Inverse of :func:`save_rule`."""
    record = read_kv(path)
    try:
        params = FairnessParams(
            lam=float(record["lambda"]), c=float(record["c"]), c_bar=float(record["c_bar"])
        )
        setting = record["setting"]
        eta = _cpe_from_record(record, "eta")
        eta_bar = _cpe_from_record(record, "eta_bar") if "eta_bar.weights" in record else None
        pi_hat = float(record["pi_hat"]) if "pi_hat" in record else None
        positive_label = float(record.get("positive_label", "1.0"))
    except KeyError as exc:
        raise DataError(f"{path}: missing rule field {exc}") from exc
    return PlugInRule(
        setting=setting,
        params=params,
        eta=eta,
        eta_bar=eta_bar,
        pi_hat=pi_hat,
        positive_label=positive_label,
    )
