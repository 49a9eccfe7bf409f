"""Fractional integral and derivative operators of Katugampola type.

Everything is computed in the transformed variable u = (t^rho - a^rho)/rho:
substituting v = (s^rho - a^rho)/rho turns s^(rho-1) ds into dv and
(t^rho - s^rho)/rho into u - v, so the integral with kernel
s^(rho-1)*((t^rho - s^rho)/rho)^(alpha-1) becomes the classical convolution
int_0^u (u-v)^(alpha-1) g(v) dv / Gamma(alpha) for every rho > 0.  One
quadrature engine (gkfrac.quadrature) therefore serves the whole operator
family, and d/du realises the scaled derivative t^(1-rho) d/dt.

Two evaluation paths are provided and cross-check each other:

* PowerFn - finite sums of monomials c*u^sigma, mapped exactly through the
  operators via the gamma-ratio coefficient rules.
* GridFunction - node samples on a graded mesh, mapped through product
  integration and finite differences.

The derivative of order alpha in (0,1) is d/du of the order-(1-alpha)
integral; the two-parameter derivative of order alpha and type beta_type
composes an inner integral of order (1-beta_type)(1-alpha), d/du, and an
outer integral of order beta_type*(1-alpha).  Type 0 recovers the plain
derivative, type 1 the Caputo-style variant.
"""

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import GradedMesh, MeshError, abel_convolve

# Exponents within this distance of 0 are treated as exactly 0.  Rounding in
# gamma_w = alpha + beta_type*(1-alpha) would otherwise leave the weight
# function's image a few ulp away from constant and break the exact
# annihilation of u^(gamma_w - 1).
_EXPONENT_SNAP = 1e-12

# Derived-quantity identities are checked to this absolute tolerance.
_IDENTITY_TOL = 1e-15


@dataclass(frozen=True)
class FracParams:
    """Order alpha in (0,1), type beta_type in [0,1], scale rho > 0, left
    endpoint a >= 0 (a > 0 required when rho < 1, keeping t^(rho-1) finite).

    gamma_w = alpha + beta_type*(1-alpha) is the weight exponent: solutions
    of the weighted problem behave like u^(gamma_w - 1) near u = 0.
    mu = 1 - beta_type*(1-alpha) satisfies alpha + 1 - gamma_w = mu.
    """

    alpha: float
    beta_type: float
    rho: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie strictly between 0 and 1, got {self.alpha}")
        if not 0 <= self.beta_type <= 1:
            raise ValueError(f"beta_type must lie in [0, 1], got {self.beta_type}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.a < 0:
            raise ValueError(f"left endpoint a must be nonnegative, got {self.a}")
        if self.rho < 1 and self.a == 0:
            raise ValueError("a must be positive when rho < 1 (t^(rho-1) blows up at 0)")
        if abs((self.alpha + 1 - self.gamma_w) - self.mu) > _IDENTITY_TOL:
            raise ValueError("derived exponents violate alpha + 1 - gamma_w = mu")

    @property
    def gamma_w(self) -> float:
        return self.alpha + self.beta_type * (1.0 - self.alpha)

    @property
    def mu(self) -> float:
        return 1.0 - self.beta_type * (1.0 - self.alpha)


def to_u(t: float, p: FracParams) -> float:
    """Transformed variable u = (t^rho - a^rho)/rho; to_u(a) = 0."""
    if t < p.a:
        raise ValueError(f"t={t} lies left of the domain start a={p.a}")
    return _to_u_raw(t, p.rho, p.a)


def to_t(u: float, p: FracParams) -> float:
    """Inverse transform t = (a^rho + rho*u)^(1/rho); to_t(0) = a."""
    if u < 0:
        raise ValueError(f"u must be nonnegative, got {u}")
    return _to_t_raw(u, p.rho, p.a)


def _to_u_raw(t, rho, a):
    return (t**rho - a**rho) / rho


def _to_t_raw(u, rho, a):
    return (a**rho + rho * u) ** (1.0 / rho)


def integral_kernel(t: float, s: float, alpha: float, p: FracParams) -> float:
    """Kernel s^(rho-1) * ((t^rho - s^rho)/rho)^(alpha-1) of the integral.

    For rho = 1, a = 0 this is exactly the power kernel (t-s)^(alpha-1).
    """
    if not p.a <= s < t:
        raise ValueError(f"kernel requires a <= s < t, got s={s}, t={t}")
    return s ** (p.rho - 1.0) * ((t**p.rho - s**p.rho) / p.rho) ** (alpha - 1.0)


def _snap(exponent: float) -> float:
    return 0.0 if abs(exponent) < _EXPONENT_SNAP else exponent


@dataclass(frozen=True)
class PowerFn:
    """Finite sum of monomials c * u^sigma with every sigma > -1.

    Terms are stored sorted by exponent with exact-duplicate exponents merged
    and zero coefficients dropped, so the zero function is the empty term
    tuple.  This is the exact closed-form path through the operators.
    """

    terms: tuple

    def __init__(self, terms=()):
        merged: dict = {}
        for coef, exponent in terms:
            exponent = _snap(float(exponent))
            if not exponent > -1:
                raise ValueError(f"exponent must be > -1, got {exponent}")
            merged[exponent] = merged.get(exponent, 0.0) + float(coef)
        cleaned = tuple(
            (c, e) for e, c in sorted(merged.items()) if c != 0.0
        )
        object.__setattr__(self, "terms", cleaned)

    @classmethod
    def monomial(cls, coef: float, exponent: float) -> "PowerFn":
        return cls(((coef, exponent),))

    @classmethod
    def zero(cls) -> "PowerFn":
        return cls(())

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PowerFn") -> "PowerFn":
        return PowerFn(self.terms + other.terms)

    def scaled(self, c: float) -> "PowerFn":
        return PowerFn(tuple((c * coef, e) for coef, e in self.terms))

    def __call__(self, u):
        """Evaluate at scalar or array u.  Negative exponents give inf at 0."""
        u = np.asarray(u, dtype=np.float64)
        out = np.zeros_like(u)
        with np.errstate(divide="ignore"):
            for coef, exponent in self.terms:
                out = out + coef * u**exponent
        return out if out.ndim else float(out)

    def sample(self, mesh: GradedMesh) -> "GridFunction":
        """Node samples on a mesh.

        When a negative exponent makes the value at u = 0 infinite, node 0 is
        filled by linear extrapolation from nodes 1 and 2 and flagged.
        """
        values = self(mesh.nodes)
        extrapolated = False
        if not np.isfinite(values[0]):
            u1, u2 = mesh.nodes[1], mesh.nodes[2]
            values[0] = values[1] - u1 * (values[2] - values[1]) / (u2 - u1)
            extrapolated = True
        return GridFunction(mesh, values, node0_extrapolated=extrapolated)


@dataclass(frozen=True)
class GridFunction:
    """Finite node values of a function of u on a graded mesh.

    Values are copied and frozen at construction; operators return new
    instances.  node0_extrapolated marks a node-0 value that is a stand-in
    (the underlying function may be singular at u = 0).
    """

    mesh: GradedMesh
    values: np.ndarray
    node0_extrapolated: bool = False

    def __init__(self, mesh, values, node0_extrapolated=False):
        values = np.array(values, dtype=np.float64)
        if values.shape != (mesh.N + 1,):
            raise MeshError(
                f"got {values.shape} values for a mesh with {mesh.N + 1} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "mesh", mesh)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "node0_extrapolated", bool(node0_extrapolated))


def integral_power(q: PowerFn, alpha: float) -> PowerFn:
    """Integral of order alpha >= 0 on monomials.

    c*u^sigma maps to c * Gamma(sigma+1)/Gamma(sigma+alpha+1) * u^(sigma+alpha);
    order 0 is the identity.  Coefficient ratios go through log-gamma.
    """
    if alpha < 0:
        raise ValueError(f"integral order must be >= 0, got {alpha}")
    if alpha == 0:
        return q
    terms = []
    for coef, sigma in q.terms:
        ratio = math.exp(math.lgamma(sigma + 1) - math.lgamma(sigma + alpha + 1))
        terms.append((coef * ratio, sigma + alpha))
    return PowerFn(tuple(terms))


def power_derivative(q: PowerFn) -> PowerFn:
    """d/du on monomials; constants vanish, exponents in (-1, 0) are rejected
    because their image would leave the admissible exponent range."""
    terms = []
    for coef, sigma in q.terms:
        if sigma == 0.0:
            continue
        if sigma < 0:
            raise ValueError(
                f"derivative of u^{sigma} leaves the exponent range (-1, inf)"
            )
        terms.append((coef * sigma, sigma - 1.0))
    return PowerFn(tuple(terms))


def generalized_derivative_power(q: PowerFn, p: FracParams) -> PowerFn:
    """Two-parameter derivative on monomials, exactly.

    Composes integral_power of order (1-beta_type)(1-alpha), d/du, and
    integral_power of order beta_type*(1-alpha).  A term whose inner image is
    constant differentiates away, so u^(gamma_w - 1) and, for type 0,
    u^(alpha - 1) are annihilated exactly.
    """
    inner = integral_power(q, (1.0 - p.beta_type) * (1.0 - p.alpha))
    middle = power_derivative(inner)
    return integral_power(middle, p.beta_type * (1.0 - p.alpha))


def katugampola_integral_grid(g: GridFunction, alpha: float) -> GridFunction:
    """Integral of order alpha in (0, 1] of grid samples."""
    return GridFunction(g.mesh, abel_convolve(g.values, alpha, g.mesh))


def katugampola_derivative_grid(g: GridFunction, alpha: float) -> GridFunction:
    """Derivative of order alpha in (0, 1) of grid samples.

    Computes d/du of the order-(1-alpha) integral with three-point finite
    differences: centered at interior nodes, one-sided at the ends.  Node 0
    of the result is extrapolated and flagged; nodes 0 and 1 of the inner
    integral are never consumed through node 0's conventional zero value,
    which is wrong for admissible data that is singular at u = 0 (there the
    inner integral tends to a nonzero constant).
    """
    if not 0 < alpha < 1:
        raise ValueError(f"derivative order must be in (0, 1), got {alpha}")
    inner = abel_convolve(g.values, 1.0 - alpha, g.mesh)
    return GridFunction(g.mesh, _grid_derivative(g.mesh, inner), node0_extrapolated=True)


def generalized_derivative_grid(g: GridFunction, p: FracParams) -> GridFunction:
    """Two-parameter derivative I^outer (d/du) I^inner of grid samples, with
    inner = (1-beta_type)(1-alpha) and outer = beta_type*(1-alpha).

    Discretised through the exact identity

        I^outer [(I^inner g)'] = (I^(1-alpha) g)' - G0 * u^(outer-1)/Gamma(outer),

    which combines integration by parts with the order-additivity of the
    integrals; G0 = (I^inner g)(0+).  Differencing the combined integral and
    adding the closed-form boundary term is far better conditioned than
    convolving the differenced inner integral: for admissible singular data
    (powers u^sigma, sigma in (-1, 0)) the inner integral has a nonzero limit
    at 0, which the naive composition picks up as a spurious point mass.  G0
    is estimated from three geometrically spaced nodes near 0; it vanishes
    for data bounded at 0.  Type 0 has no boundary term and returns the plain
    derivative unchanged; type 1's inner integral is the data itself.
    """
    plain = katugampola_derivative_grid(g, p.alpha)
    if p.beta_type == 0.0:
        return plain
    outer = p.beta_type * (1.0 - p.alpha)
    inner = (1.0 - p.beta_type) * (1.0 - p.alpha)
    g0 = _inner_limit_at_zero(g, inner)
    u = g.mesh.nodes
    values = np.empty_like(plain.values)
    values[1:] = plain.values[1:] - g0 * u[1:] ** (outer - 1.0) / math.gamma(outer)
    values[0] = values[1] - u[1] * (values[2] - values[1]) / (u[2] - u[1])
    return GridFunction(g.mesh, values, node0_extrapolated=True)


def _inner_limit_at_zero(g: GridFunction, order: float) -> float:
    """Limit of I^order g at u = 0+ from samples near the endpoint.

    Fits F(u) ~ F0 + c*u^s through three nodes with geometrically increasing
    u (indices base, 2*base, 4*base have u-ratio 2^r on a graded mesh) and
    extrapolates; this recovers F0 = 0 exactly for pure powers with s > 0 and
    the constant itself for data where the integral tends to one.
    """
    base = min(8, g.mesh.N // 4)
    if base < 1:
        base = 1  # 3-node meshes: degenerate, use what exists
    idx = [base, min(2 * base, g.mesh.N), min(4 * base, g.mesh.N)]
    if order == 0.0:
        f1, f2, f3 = (float(g.values[i]) for i in idx)
    else:
        f1, f2, f3 = (_convolve_at(g.values, order, g.mesh, i) for i in idx)
    d1 = f2 - f1
    d2 = f3 - f2
    scale = max(abs(f1), abs(f2), abs(f3))
    if scale == 0.0 or abs(d2 - d1) <= 1e-9 * scale:
        return f3  # flat to working precision: the limit is the plateau
    return f1 - d1 * d1 / (d2 - d1)


def _convolve_at(values: np.ndarray, alpha: float, mesh: GradedMesh, index: int) -> float:
    """(1/Gamma(a)) * (K*g)(u_index) for one node, in O(index) panel moments."""
    u = mesh.nodes
    T = float(u[index])
    total = 0.0
    ap1 = alpha + 1.0
    for j in range(index):
        d0 = T - float(u[j])
        h = float(u[j + 1]) - float(u[j])
        theta = h / d0
        e0 = alpha * math.log1p(-theta) if theta < 1.0 else -math.inf
        da = d0**alpha
        m0 = -math.expm1(e0) * da / alpha
        s = -math.expm1(e0 + math.log1p(alpha * theta)) * da * d0 / (alpha * ap1 * h)
        total += (m0 - s) * values[j] + s * values[j + 1]
    return total / math.gamma(alpha)


def _lagrange3_derivative(x0, x1, x2, f0, f1, f2, at):
    """Derivative at `at` of the parabola through three points (vectorised)."""
    c0 = (2 * at - x1 - x2) / ((x0 - x1) * (x0 - x2))
    c1 = (2 * at - x0 - x2) / ((x1 - x0) * (x1 - x2))
    c2 = (2 * at - x0 - x1) / ((x2 - x0) * (x2 - x1))
    return c0 * f0 + c1 * f1 + c2 * f2


def _grid_derivative(mesh: GradedMesh, values: np.ndarray) -> np.ndarray:
    """Three-point d/du on the (nonuniform) mesh.

    Interior nodes i >= 2 use the centered stencil (i-1, i, i+1); the right
    end uses (N-2, N-1, N).  Nodes 0 and 1 are served by the stencil (1, 2, 3)
    so that node 0's value - a convention when the data is singular there -
    never enters; with only 3 nodes the single full stencil is used throughout.
    """
    u = mesh.nodes
    n = u.shape[0]
    if n < 3:
        raise MeshError("derivative needs at least 3 mesh nodes")
    d = np.empty(n)
    if n == 3:
        for i in range(3):
            d[i] = _lagrange3_derivative(u[0], u[1], u[2], values[0], values[1], values[2], u[i])
        return d
    x0, x1, x2 = u[1:-3], u[2:-2], u[3:-1]
    d[2:-2] = _lagrange3_derivative(
        x0, x1, x2, values[1:-3], values[2:-2], values[3:-1], x1
    )
    for i, at in ((0, u[0]), (1, u[1])):
        d[i] = _lagrange3_derivative(
            u[1], u[2], u[3], values[1], values[2], values[3], at
        )
    for i, at in ((n - 2, u[n - 2]), (n - 1, u[n - 1])):
        d[i] = _lagrange3_derivative(
            u[n - 3], u[n - 2], u[n - 1], values[n - 3], values[n - 2], values[n - 1], at
        )
    return d
