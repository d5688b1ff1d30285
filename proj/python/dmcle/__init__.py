"""Discriminative maximum composite likelihood estimation."""

from ._dmcle import *  # noqa: F401,F403
from ._dmcle import (
    CompositeDesign,
    Error,
    FitOptions,
    FitResult,
    fit_dmcle,
)


def fit(model, data, xi, coords=None, names=None, variance="plugin", options=None):
    """Builds the design for `model`, fits at `xi` and attaches inference.

    model is "equicorr", "hetero-location" or "smith" (data already on the
    unit Frechet scale for smith). Returns (design, fit).
    """
    from . import _dmcle as _m

    if model == "equicorr":
        design, theta0 = _m.equicorr_design(data), _m.equicorr_initial(data)
    elif model == "hetero-location":
        design, theta0 = _m.hetero_location_design(data), _m.hetero_location_initial(data)
    elif model == "smith":
        if names is None:
            names = [f"s{j + 1}" for j in range(len(coords))]
        design, theta0 = _m.smith_design(data, coords, names), _m.smith_initial(data, coords)
    else:
        raise _m.ConfigError(f"unknown model {model!r}")
    res = fit_dmcle(design, xi, theta0, options or FitOptions())
    if res.converged:
        res = _m.attach_inference(design, res, variance)
    return design, res
