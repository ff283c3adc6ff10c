"""Anomaly detection: detector zoo, TPE model search, service loop."""

from .detectors import (
    KINDS,
    REPORT_SCHEMA,
    AnomalyReport,
    DetectorModel,
    SentinelError,
    detect,
    f1_score,
    fit,
    refit,
)
from .select import SelectionResult, select_model
from .service import handle, serve
from .tpe import Dim, TrialHistory, gamma, tpe_suggest

__all__ = [
    "KINDS",
    "REPORT_SCHEMA",
    "AnomalyReport",
    "DetectorModel",
    "Dim",
    "SelectionResult",
    "SentinelError",
    "TrialHistory",
    "detect",
    "f1_score",
    "fit",
    "gamma",
    "handle",
    "refit",
    "select_model",
    "serve",
    "tpe_suggest",
]
