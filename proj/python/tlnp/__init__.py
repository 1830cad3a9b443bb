"""Transfer-learning Neyman-Pearson outlier detection.

Matrices are NumPy arrays with one sample per row. Configuration and reports
travel as plain dicts using the same JSON layout as the ``tlnp`` CLI.
"""

import json as _json

from . import _tlnp
from ._tlnp import (
    AlgorithmFailure,
    ConfigError,
    FeasibilityError,
    IngestError,
    InputError,
    Model,
    TlnpError,
    TrainingDiverged,
    UndefinedError,
    eval_loss,
    eval_loss_deriv,
    init_model,
    make_model,
    parameter_count,
    solve_procedure8,
    solve_target_hat,
    surrogate_type1,
    surrogate_type2,
    type1_error,
    type2_error,
)

METHODS = (
    "tlnp",
    "tlnp_variance",
    "only_target_np",
    "only_source_np",
    "pooled_np",
    "threshold_target",
    "threshold_pooled",
    "tlod",
)


def _dump(config):
    return _json.dumps(config or {})


def train(normal, target, source=None, *, lambda_s=0.0, lambda_0=1.0, config=None):
    """Train one model on the weighted Lagrangian cost."""
    return _tlnp._train(normal, target, source, float(lambda_s), float(lambda_0), _dump(config))


def fit(method, normal, target, source=None, config=None):
    """Fit TLNP or a baseline. Returns a dict with the chosen model and its
    training errors; for TLNP the ``audit`` entry holds the full trace."""
    if method not in METHODS:
        raise ConfigError(f"unknown method: {method}")
    out = _tlnp._fit(method, normal, target, source, _dump(config))
    if out["audit"] is not None:
        out["audit"] = _json.loads(out["audit"])
    return out


def gen_gaussian(spec=None):
    return _tlnp._gen_gaussian(_dump(spec))


def ingest_csv(spec):
    spec = dict(spec)
    spec["path"] = str(spec["path"])
    return _tlnp._ingest_csv(_dump(spec))


def run_experiment(config, include_timing=False):
    return _json.loads(_tlnp._run_experiment(_dump(config), include_timing))


def config_hash(config):
    return _tlnp._config_hash(_dump(config))


__all__ = [name for name in dir() if not name.startswith("_")]
