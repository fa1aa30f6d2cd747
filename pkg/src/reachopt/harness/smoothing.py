"""Local least-squares polynomial smoothing for sampled joint angles.

Interior samples use the standard convolution weights of a centred
window; near the ends the window is truncated and a fresh polynomial fit
is evaluated at the sample (no padding).
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError

DEFAULT_WINDOW = 61
DEFAULT_ORDER = 4


def _center_weights(window: int, order: int) -> np.ndarray:
    # QR-based least squares on offsets scaled into [-1, 1] (keeps the
    # Vandermonde well conditioned); the test suite cross-checks these
    # weights against explicit normal equations.
    half = window // 2
    offsets = np.arange(-half, half + 1, dtype=float) / max(half, 1)
    vander = offsets[:, None] ** np.arange(order + 1)[None, :]
    target = np.zeros(order + 1)
    target[0] = 1.0
    weights, *_ = np.linalg.lstsq(vander.T, target, rcond=None)
    return weights


def savgol_filter(series, window: int = DEFAULT_WINDOW, order: int = DEFAULT_ORDER):
    """Smooth one series (N,) or several columns (N, k)."""
    data = np.asarray(series, dtype=float)
    if window % 2 != 1:
        raise ContractError("window must be odd")
    if order >= window:
        raise ContractError("order must be smaller than window")
    n = data.shape[0]
    if n < window:
        raise ContractError(f"series length {n} shorter than window {window}")

    single = data.ndim == 1
    cols = data[:, None] if single else data
    half = window // 2
    weights = _center_weights(window, order)

    out = np.empty_like(cols)
    # Interior: correlate each column with the centred weights.
    for j in range(cols.shape[1]):
        out[half : n - half, j] = np.convolve(cols[:, j], weights[::-1], mode="valid")
    # Edges: truncated-window fits evaluated at the edge sample, offsets
    # scaled like the interior for conditioning.
    powers = np.arange(order + 1)
    for i in list(range(half)) + list(range(n - half, n)):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        offsets = np.arange(lo - i, hi - i, dtype=float) / max(half, 1)
        vander = offsets[:, None] ** powers[None, :]
        coef, *_ = np.linalg.lstsq(vander, cols[lo:hi], rcond=None)
        out[i] = coef[0]
    return out[:, 0] if single else out
