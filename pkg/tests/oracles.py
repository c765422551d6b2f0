"""Reference implementations that share no code with the package.

Exact rationals via ``math.comb`` and ``fractions``, high precision via
``mpmath``, and brute force via ``itertools``.
"""

import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np


def hyp_pmf_exact(p, k, s) -> Fraction:
    if not 0 <= k - s <= p - k:
        return Fraction(0)
    return Fraction(math.comb(k, s) * math.comb(p - k, k - s), math.comb(p, k))


def chi2_formula(p, k, sigma2, n, lam, dps=50) -> float:
    """``lam^(2n) E_S[(2 lam^2 - 1 - (k+S)/s2)^(-n/2) (1 + (k-S)/s2)^(-n/2)] - 1`` in mpmath."""
    with mpmath.workdps(dps):
        lam = mpmath.mpf(lam)
        s2 = mpmath.mpf(sigma2)
        total = mpmath.mpf(0)
        for s in range(k + 1):
            w = hyp_pmf_exact(p, k, s)
            if w == 0:
                continue
            a = 2 * lam**2 - 1 - (k + s) / s2
            b = 1 + (k - s) / s2
            total += mpmath.mpf(w.numerator) / w.denominator * a ** (-mpmath.mpf(n) / 2) * b ** (-mpmath.mpf(n) / 2)
        return float(lam ** (2 * n) * total - 1)


def chi2_at_lambda0(p, k, sigma2, n) -> float:
    """``E_S[(1 - S/(k + s2))^(-n)] - 1`` in mpmath."""
    with mpmath.workdps(50):
        s2 = mpmath.mpf(sigma2)
        total = mpmath.mpf(0)
        for s in range(k + 1):
            w = hyp_pmf_exact(p, k, s)
            if w:
                total += mpmath.mpf(w.numerator) / w.denominator * (1 - s / (k + s2)) ** (-n)
        return float(total - 1)


def brute_residuals(X, Y, k):
    """Residual of every k-subset, listed in colex order."""
    p = X.shape[1]
    subsets = sorted(itertools.combinations(range(p), k), key=lambda c: c[::-1])
    return subsets, [float(np.sum((Y - X[:, list(c)].sum(axis=1)) ** 2)) for c in subsets]
