"""Binary entropy and binary-symmetric-channel mutual information."""
from __future__ import annotations

import numpy as np
from scipy.special import entr


def binary_entropy(p):
    """``H2(p) = -p log2 p - (1-p) log2(1-p)`` with ``H2(0) = H2(1) = 0``.

    Accepts scalars or arrays; values outside [0, 1] raise ``ValueError``.
    """
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("binary_entropy is defined on [0, 1]")
    h = (entr(p) + entr(1.0 - p)) / np.log(2.0)
    return float(h) if h.ndim == 0 else h


def i_bsc(p):
    """Mutual information ``1 - H2(p)`` of a BSC with uniform input."""
    h = binary_entropy(p)
    return 1.0 - h
