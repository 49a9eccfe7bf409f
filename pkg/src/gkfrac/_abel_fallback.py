"""Pure-numpy assembly of product-trapezoidal weights for the Abel kernel.

The convolution (K*g)(T) = int_0^T (T-v)^(alpha-1) g(v) dv is discretised by
interpolating g linearly on each mesh panel [u_j, u_{j+1}] and integrating the
interpolant against the kernel exactly.  With d0 = T - u_j, theta = width/d0
the two panel moments have stable closed forms built on
e = expm1(alpha*log1p(-theta)) = (1-theta)^alpha - 1:

    m0         = int (T-v)^(a-1) dv          = -e * d0^a / a
    s * width  = int (T-v)^(a-1) (v - u_j) dv
               = -(e + a*theta*(1+e)) * d0^(a+1) / (a*(a+1))

The m0 form avoids the cancellation of d0^a - d1^a on panels much narrower
than their distance to T.  The s form is an exact rewriting of
-expm1(a*log1p(-theta) + log1p(a*theta)); for theta below 1e-6 the rewritten
form cancels (the result is O(theta^2) assembled from O(theta) pieces), so
those few panels fall back to the log-space original.  Every weight stays
nonnegative: each bracket is nonpositive by the concavity bounds
a*log1p(-theta) <= log(1/(1+a*theta)) <= 0, and node u_j receives m0 - s >= 0,
node u_{j+1} receives s >= 0 (integrals of hat functions against a positive
kernel).

This module mirrors gkfrac._abel (Cython); gkfrac.quadrature picks one of the
two at import time.
"""

import numpy as np

_THETA_SPLIT = 1e-6


def assemble_weights(nodes: np.ndarray, alpha: float, scale: float) -> np.ndarray:
    """Dense lower-triangular weight matrix W with W[i] @ g = scale * (K*g)(u_i).

    nodes must be strictly increasing with nodes[0] == 0.  Row 0 is zero.
    """
    n = nodes.shape[0]
    w = np.zeros((n, n), dtype=np.float64)
    widths = np.diff(nodes)
    inv_alpha = 1.0 / alpha
    inv_aap1 = 1.0 / (alpha * (alpha + 1.0))
    with np.errstate(divide="ignore"):  # log1p(-1) = -inf on the last panel
        for i in range(1, n):
            d0 = nodes[i] - nodes[:i]
            h = widths[:i]
            theta = h / d0
            e0 = alpha * np.log1p(-theta)
            e = np.expm1(e0)
            da = d0**alpha
            m0 = -e * da * inv_alpha
            sh = -(e + alpha * theta * (1.0 + e))
            small = theta < _THETA_SPLIT
            if small.any():
                sh[small] = -np.expm1(e0[small] + np.log1p(alpha * theta[small]))
            s = sh * da * d0 * inv_aap1 / h
            w[i, :i] += (m0 - s) * scale
            w[i, 1 : i + 1] += s * scale
    return w
