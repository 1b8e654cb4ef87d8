import numpy as np

from ..errors import ConstantTruth, LengthMismatch


def _pair(y_true, y_pred, min_len=1):
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"lengths differ: {len(y_true)} vs {len(y_pred)}")
    if len(y_true) < min_len:
        raise LengthMismatch(f"need at least {min_len} values")
    return y_true, y_pred


def r2(y_true, y_pred) -> float:
    """Coefficient of determination against the mean of ``y_true``."""
    y_true, y_pred = _pair(y_true, y_pred, min_len=2)
    ss_tot = np.sum((y_true - y_true.mean()) ** 2)
    if ss_tot == 0:
        raise ConstantTruth("R2 undefined for constant truth")
    return float(1.0 - np.sum((y_true - y_pred) ** 2) / ss_tot)


def mae(y_true, y_pred) -> float:
    y_true, y_pred = _pair(y_true, y_pred)
    return float(np.mean(np.abs(y_true - y_pred)))


def rmse(y_true, y_pred) -> float:
    y_true, y_pred = _pair(y_true, y_pred)
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))
