"""Gamma/beta evaluation, a limit-product approximation of gamma, and a
series Mittag-Leffler function used as a closed-form oracle for linear
right-hand sides.

All ratios of gamma/beta values that enter long products elsewhere in the
package are computed through the log-space helpers here, so that products of
hundreds of factors neither overflow nor underflow.
"""

import math
from dataclasses import dataclass

import numpy as np


class NonConvergenceError(ArithmeticError):
    """A truncated series failed to meet its tolerance within max_terms."""


def gamma(x: float) -> float:
    """Gamma function for strictly positive arguments.

    Negative and zero arguments are rejected rather than continued through
    the poles; arguments past the double-precision factorial range raise
    OverflowError.
    """
    if not x > 0:
        raise ValueError(f"gamma requires a positive argument, got {x}")
    try:
        return math.gamma(x)
    except OverflowError:
        raise OverflowError(f"gamma({x}) exceeds the double-precision range") from None


def log_gamma(x: float) -> float:
    """log(Gamma(x)) for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires a positive argument, got {x}")
    return math.lgamma(x)


def beta(x: float, y: float) -> float:
    """Beta function Gamma(x)Gamma(y)/Gamma(x+y), evaluated in log space."""
    return math.exp(log_beta(x, y))


def log_beta(x: float, y: float) -> float:
    """log(B(x, y)) for x, y > 0."""
    if not (x > 0 and y > 0):
        raise ValueError(f"beta requires positive arguments, got ({x}, {y})")
    return math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y)


def gauss_gamma_product(x: float, m: int) -> float:
    """The finite product m^x * m! / (x(x+1)...(x+m)).

    Converges to gamma(x) as m grows.  Evaluated as an explicit log-space sum
    (O(m)) so it stays an independent check on the gamma implementation; for
    that reason it is never used as a production gamma path.
    """
    if not x > 0:
        raise ValueError(f"gauss_gamma_product requires x > 0, got {x}")
    if m < 1:
        raise ValueError(f"gauss_gamma_product requires m >= 1, got {m}")
    i = np.arange(0.0, m + 1.0)
    log_num = x * math.log(m) + np.log(i[1:]).sum()
    log_den = np.log(x + i).sum()
    return math.exp(log_num - log_den)


@dataclass(frozen=True)
class MLParams:
    """Parameters of the two-parameter Mittag-Leffler series.

    ml_alpha is the exponent step, ml_beta the offset: the series is
    sum_j z^j / Gamma(ml_alpha*j + ml_beta).  tol is the relative truncation
    tolerance and max_terms caps the summation.
    """

    ml_alpha: float
    ml_beta: float
    tol: float = 1e-14
    max_terms: int = 500

    def __post_init__(self):
        if not self.ml_alpha > 0:
            raise ValueError(f"ml_alpha must be positive, got {self.ml_alpha}")
        if not self.ml_beta > 0:
            raise ValueError(f"ml_beta must be positive, got {self.ml_beta}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


_ML_MAX_ABS_Z = 50.0


def mittag_leffler(p: MLParams, z: float, with_terms: bool = False):
    """Truncated series sum_j z^j / Gamma(ml_alpha*j + ml_beta).

    Summation stops once the next term's magnitude drops below
    tol * |partial sum|; hitting max_terms first raises NonConvergenceError.
    Arguments are restricted to |z| <= 50, the regime where the plain series
    is adequate.  With with_terms=True returns (value, terms_used).
    """
    if abs(z) > _ML_MAX_ABS_Z:
        raise ValueError(f"|z| must be <= {_ML_MAX_ABS_Z}, got {z}")
    if z == 0.0:
        value = math.exp(-math.lgamma(p.ml_beta))
        return (value, 1) if with_terms else value

    log_abs_z = math.log(abs(z))
    sign_z = 1.0 if z > 0 else -1.0
    total = 0.0
    sign = 1.0
    for j in range(p.max_terms):
        log_mag = j * log_abs_z - math.lgamma(p.ml_alpha * j + p.ml_beta)
        total += sign * math.exp(log_mag)
        next_mag = math.exp(
            (j + 1) * log_abs_z - math.lgamma(p.ml_alpha * (j + 1) + p.ml_beta)
        )
        if next_mag < p.tol * abs(total):
            terms = j + 1
            return (total, terms) if with_terms else total
        sign *= sign_z
    raise NonConvergenceError(
        f"Mittag-Leffler series did not reach tol={p.tol} in {p.max_terms} terms"
    )
