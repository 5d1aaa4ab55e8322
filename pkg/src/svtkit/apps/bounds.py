"""Query lower bound for eigenvalue transformation."""
from __future__ import annotations

import math

import numpy as np


def query_lower_bound(f, x: float, y: float, eps: float = 0.0) -> float:
    """Minimum number of encoding uses needed to realize f on a spectrum
    containing both x and y, to accuracy eps.

    Returns max[f(x)-f(y)-2e, sqrt(1-(f(y)-e)^2)-sqrt(1-(f(x)+e)^2)]
    divided by ||R(x) - R(y)|| = sqrt(2) sqrt(1-xy-sqrt((1-x^2)(1-y^2))).
    """
    if not (-1 <= x <= 1 and -1 <= y <= 1) or x == y:
        raise ValueError("need distinct x, y in [-1, 1]")
    fx, fy = float(np.real(f(x))), float(np.real(f(y)))
    inner = 1.0 - x * y - math.sqrt(max((1 - x * x) * (1 - y * y), 0.0))
    denom = math.sqrt(2.0) * math.sqrt(max(inner, 1e-300))
    n1 = fx - fy - 2 * eps
    a2 = 1.0 - min(max(fy - eps, -1.0), 1.0) ** 2
    b2 = 1.0 - min(max(fx + eps, -1.0), 1.0) ** 2
    n2 = math.sqrt(max(a2, 0.0)) - math.sqrt(max(b2, 0.0))
    return max(n1, n2) / denom
