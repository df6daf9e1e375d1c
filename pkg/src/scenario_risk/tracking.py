import logging

import mlflow

from .config import TrackingConfig

logger = logging.getLogger(__name__)


def _scalars(values):
    out = {}
    for key, value in values.items():
        if isinstance(value, bool):
            out[key] = float(value)
        elif isinstance(value, (int, float)):
            out[key] = float(value)
    return out


def log_run(run_name, params, metrics, tracking: TrackingConfig):
    """Log one CLI run to MLflow; failures are logged and never abort the run."""
    if not tracking.enabled:
        return False
    try:
        mlflow.set_tracking_uri(tracking.resolved_uri())
        mlflow.set_experiment(tracking.experiment)
        with mlflow.start_run(run_name=run_name):
            for key, value in params.items():
                mlflow.log_param(key, value)
            for key, value in _scalars(metrics).items():
                mlflow.log_metric(key, value)
        logger.info(f"Tracked run {run_name} at {tracking.resolved_uri()}")
        return True
    except Exception as e:
        logger.warning(f"MLflow tracking failed for {run_name}: {e}")
        return False
