"""Composite-Simpson helpers used by the wavelet and kernel modules."""

import numpy as np


def simpson_rule(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Simpson on [lo, hi] with n points.

    n must be odd (even number of panels).
    """
    if n < 3 or n % 2 == 0:
        raise ValueError("simpson_rule needs an odd number of points >= 3")
    x = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return x, w * (h / 3.0)


def midpoint_grid(lo: float, hi: float, n: int) -> tuple[np.ndarray, float]:
    """Midpoint nodes on (lo, hi) and the common weight (hi - lo)/n."""
    h = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * h, h
