# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly of product-trapezoidal weights for the Abel kernel.

Same contract and formulas as gkfrac._abel_fallback.assemble_weights; see
that module for the moment derivation and the small-theta branch rationale.
"""

import numpy as np

from libc.math cimport expm1, log1p, pow

DEF THETA_SPLIT = 1e-6


def assemble_weights(const double[::1] nodes, double alpha, double scale):
    """Dense lower-triangular weight matrix W with W[i] @ g = scale * (K*g)(u_i).

    nodes must be strictly increasing with nodes[0] == 0.  Row 0 is zero.
    """
    cdef Py_ssize_t n = nodes.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] w = out
    cdef Py_ssize_t i, j
    cdef double t, d0, h, theta, e, da, m0, sh, s
    cdef double inv_alpha = 1.0 / alpha
    cdef double inv_aap1 = 1.0 / (alpha * (alpha + 1.0))

    for i in range(1, n):
        t = nodes[i]
        for j in range(i):
            d0 = t - nodes[j]
            h = nodes[j + 1] - nodes[j]
            theta = h / d0
            # e = expm1(alpha*log1p(-theta)) = (1 - theta)^alpha - 1, in [-1, 0]
            e = expm1(alpha * log1p(-theta))
            da = pow(d0, alpha)
            m0 = -e * da * inv_alpha
            if theta >= THETA_SPLIT:
                # (1-theta)^alpha (1+alpha*theta) - 1 == e + alpha*theta*(1+e)
                sh = -(e + alpha * theta * (1.0 + e))
            else:
                # near-cancelling regime: evaluate in log space instead
                sh = -expm1(alpha * log1p(-theta) + log1p(alpha * theta))
            s = sh * da * d0 * inv_aap1 / h
            w[i, j] += (m0 - s) * scale
            w[i, j + 1] += s * scale
    return out
