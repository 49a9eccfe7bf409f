"""Weighted Cauchy-type problem and its Picard iteration.

The problem D^(alpha,beta) x = f(t, x) with weighted initial value
lim u^(1-gamma_w) x = x_a is equivalent to the integral equation

    x(t) = x_a * u^(gamma_w - 1) + I^alpha [f(., x(.))](t),

and the iteration phi_0 = x_a*u^(gamma_w-1), phi_(n+1) = phi_0 + I^alpha f(., phi_n)
converges uniformly in the weighted norm on [a, a+l], where the radius l is
computed from the growth constants of f.  All state lives in weighted
coordinates w(u) = u^(1-gamma_w) * x(t(u)): the initial condition, the ball
|w - x_a| <= b, and the convergence theory are all phrased in that norm, and
w is bounded where x itself may blow up at u = 0.

The a-priori increment bounds are products of beta-function factors; they are
accumulated in log space because a hundred-term product of B(alpha, .) values
under- or overflows doubles long before it stops being informative.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expressions
from .operators import FracParams, GridFunction, to_t, to_u
from .quadrature import GradedMesh, abel_convolve, build_mesh
from .special import log_beta


class BallViolationError(RuntimeError):
    """An iterate left the ball |w - x_a| <= ball_radius.

    The iteration theory guarantees iterates stay inside the ball when the
    declared growth constants actually bound f, so this signals inconsistent
    hypothesis data rather than a solver bug.
    """


class DegenerateSeriesError(ArithmeticError):
    """The a-priori bound series is identically zero or underflows."""


@dataclass(frozen=True)
class HypothesisData:
    """Declared growth/Lipschitz constants of the right-hand side.

    bound_M and exponent_k bound |f| <= M * u^k on the ball; lipschitz_A is
    the weighted Lipschitz constant; ball_radius the radius b of the weighted
    ball around x_a; horizon_h the length of the candidate interval [a, a+h].
    Constants are declared by the caller and spot-checked (verify_hypotheses),
    never inferred.
    """

    bound_M: float
    exponent_k: float
    lipschitz_A: float
    ball_radius: float
    horizon_h: float

    def __post_init__(self):
        if self.bound_M < 0:
            raise ValueError(f"bound_M must be >= 0, got {self.bound_M}")
        if not self.lipschitz_A > 0:
            raise ValueError(f"lipschitz_A must be > 0, got {self.lipschitz_A}")
        if not self.ball_radius > 0:
            raise ValueError(f"ball_radius must be > 0, got {self.ball_radius}")
        if not self.horizon_h > 0:
            raise ValueError(f"horizon_h must be > 0, got {self.horizon_h}")

    def validate_against(self, p: FracParams) -> None:
        """Admissibility of k relative to the operator parameters.

        Requires exponent_k > beta_type*(1-alpha) - 1, i.e. k + mu > 0; also
        re-checks the exponent identity alpha + k + 1 - gamma_w = k + mu with
        both sides computed independently.
        """
        if not self.exponent_k > p.beta_type * (1.0 - p.alpha) - 1.0:
            raise ValueError(
                f"exponent_k={self.exponent_k} must exceed "
                f"beta_type*(1-alpha) - 1 = {p.beta_type * (1.0 - p.alpha) - 1.0}"
            )
        lhs = p.alpha + self.exponent_k + 1.0 - p.gamma_w
        rhs = self.exponent_k + p.mu
        if abs(lhs - rhs) > 1e-15:
            raise ValueError("exponent identity alpha + k + 1 - gamma_w = k + mu failed")


@dataclass
class ProblemSpec:
    """Operator parameters, weighted initial value, right-hand side and
    declared constants; f may be given as source text or a parsed tree."""

    params: FracParams
    x_a: float
    f: object
    hyp: HypothesisData

    def __post_init__(self):
        if isinstance(self.f, str):
            self.f = expressions.parse(self.f)
        self.hyp.validate_against(self.params)
        # smoke evaluation at an interior sample point
        t_probe = self.params.a + 0.5 * self.hyp.horizon_h
        u_probe = to_u(t_probe, self.params)
        x_probe = u_probe ** (self.params.gamma_w - 1.0) * self.x_a
        expressions.evaluate(self.f, t=t_probe, x=x_probe, u=u_probe)


@dataclass(frozen=True)
class SolverConfig:
    node_count: int = 1024
    grading: float = 3.0
    tol: float = 1e-8
    max_iter: int = 50
    store_iterates: bool = False

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError(f"node_count must be >= 2, got {self.node_count}")
        if not self.grading >= 1:
            raise ValueError(f"grading must be >= 1, got {self.grading}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class SolveResult:
    """Converged weighted solution and its diagnostics.

    weighted_solution[i] approximates u_i^(1-gamma_w) * x(t(u_i)); entry 0 is
    exactly x_a.  increments holds the sup-node step sizes, apriori_terms the
    a-priori bound terms, max_ball_deviation the largest sup-node |w - x_a|
    seen across all iterates.
    """

    mesh: GradedMesh
    weighted_solution: np.ndarray
    iterations_used: int
    final_increment: float
    residual_sup: float
    apriori_terms: np.ndarray
    increments: np.ndarray
    converged: bool
    max_ball_deviation: float
    radius_l: float
    length_L: float
    iterates: Optional[list] = field(default=None, repr=False)


def existence_radius(spec: ProblemSpec) -> float:
    """Radius l = min(h, (b/M * Gamma(alpha)/B(alpha, k+1))^(1/(mu+k))).

    The power branch is the largest interval on which the a-priori bound
    keeps iterates inside the ball; with M = 0 it is vacuous and l = h.
    Evaluated in log space.
    """
    p, hyp = spec.params, spec.hyp
    if not hyp.exponent_k + p.mu > 0:
        raise ValueError("existence radius needs exponent_k + mu > 0")
    if hyp.bound_M == 0.0:
        return hyp.horizon_h
    log_power = (
        math.log(hyp.ball_radius)
        - math.log(hyp.bound_M)
        + math.lgamma(p.alpha)
        - log_beta(p.alpha, hyp.exponent_k + 1.0)
    ) / (p.mu + hyp.exponent_k)
    return min(hyp.horizon_h, math.exp(log_power))


def transformed_length(spec: ProblemSpec, l: Optional[float] = None) -> float:
    """Length L = to_u(a + l) of the solve interval in the transformed variable."""
    if l is None:
        l = existence_radius(spec)
    return to_u(spec.params.a + l, spec.params)


def phi0(spec: ProblemSpec, mesh: GradedMesh) -> GridFunction:
    """Initial weighted iterate: constant x_a (the weight of x_a*u^(gamma_w-1))."""
    return GridFunction(mesh, np.full(mesh.N + 1, float(spec.x_a)))


def _integrand(w: np.ndarray, spec: ProblemSpec, mesh: GradedMesh) -> np.ndarray:
    """f(t, x) at the nodes, with x reconstructed as u^(gamma_w-1) * w.

    Node 0 is filled by linear extrapolation from nodes 1 and 2: the
    unweighted x generally diverges at u = 0, while the kernel makes the
    panel-0 contribution O(u_1^(k+alpha)) and therefore negligible on a
    graded mesh.
    """
    p = spec.params
    u = mesh.nodes
    g = np.empty(mesh.N + 1)
    gw1 = p.gamma_w - 1.0
    for i in range(1, mesh.N + 1):
        ui = float(u[i])
        xi = ui**gw1 * float(w[i])
        try:
            g[i] = expressions.evaluate(spec.f, t=to_t(ui, p), x=xi, u=ui)
        except expressions.EvalError as exc:
            raise expressions.EvalError(
                f"at node {i} (u={ui!r}): {exc.args[0]}", exc.node
            ) from None
        if not math.isfinite(g[i]):
            raise ArithmeticError(
                f"right-hand side is not finite at node {i} (u={ui!r}): {g[i]}"
            )
    g[0] = g[1] - u[1] * (g[2] - g[1]) / (u[2] - u[1])
    return g


def picard_step(w_prev: GridFunction, spec: ProblemSpec, mesh: GradedMesh) -> GridFunction:
    """One sweep of the iteration in weighted coordinates.

    w_next = x_a + u^(1-gamma_w) * I^alpha [f(., u^(gamma_w-1) w_prev)];
    node 0 is exactly x_a.
    """
    p = spec.params
    g = _integrand(w_prev.values, spec, mesh)
    conv = abel_convolve(g, p.alpha, mesh)
    w = spec.x_a + mesh.nodes ** (1.0 - p.gamma_w) * conv
    w[0] = spec.x_a
    return GridFunction(mesh, w)


def picard_solve(spec: ProblemSpec, config: SolverConfig = SolverConfig()) -> SolveResult:
    """Iterate picard_step from phi0 until the sup-node weighted increment
    drops to tol or max_iter is reached; deterministic for a fixed config.

    Raises BallViolationError if an iterate leaves |w - x_a| <= ball_radius,
    which the convergence theory rules out for honest hypothesis constants.
    Non-convergence at max_iter sets converged=False on the result instead of
    raising.
    """
    radius = existence_radius(spec)
    length = transformed_length(spec, radius)
    mesh = build_mesh(length, config.node_count, config.grading)

    w = phi0(spec, mesh)
    iterates = [w.values] if config.store_iterates else None
    increments = []
    max_dev = 0.0
    converged = False
    for _ in range(config.max_iter):
        w_next = picard_step(w, spec, mesh)
        inc = float(np.max(np.abs(w_next.values - w.values)))
        increments.append(inc)
        dev = float(np.max(np.abs(w_next.values - spec.x_a)))
        max_dev = max(max_dev, dev)
        if dev > spec.hyp.ball_radius:
            raise BallViolationError(
                f"iterate {len(increments)} left the ball: sup |w - x_a| = {dev} "
                f"> ball_radius = {spec.hyp.ball_radius}; declared hypothesis "
                "constants do not bound the right-hand side"
            )
        if iterates is not None:
            iterates.append(w_next.values)
        w = w_next
        if inc <= config.tol:
            converged = True
            break

    n_iter = len(increments)
    resid = float(np.max(np.abs(picard_step(w, spec, mesh).values - w.values)))
    n_terms = max(n_iter, 2)
    terms = np.exp(apriori_log_terms(n_terms, spec.params, spec.hyp, radius))
    return SolveResult(
        mesh=mesh,
        weighted_solution=w.values,
        iterations_used=n_iter,
        final_increment=increments[-1],
        residual_sup=resid,
        apriori_terms=terms,
        increments=np.asarray(increments),
        converged=converged,
        max_ball_deviation=max_dev,
        radius_l=radius,
        length_L=length,
        iterates=iterates,
    )


def residual(result: SolveResult, spec: ProblemSpec) -> float:
    """Sup-node defect of the weighted integral equation at the final iterate.

    Applies one more picard_step: a fixed point of the step is exactly a
    solution of the integral equation, so the defect certifies equivalence.
    """
    w = GridFunction(result.mesh, result.weighted_solution)
    return float(np.max(np.abs(picard_step(w, spec, result.mesh).values - w.values)))


# --- a-priori bound machinery ---------------------------------------------


def _log_product_factors(n: int, p: FracParams, hyp: HypothesisData) -> np.ndarray:
    """log of B(alpha, (i+1)k + i(alpha+1-gamma_w) + 1)/Gamma(alpha), i = 0..n."""
    k = hyp.exponent_k
    step = p.alpha + 1.0 - p.gamma_w  # equals mu
    lg_alpha = math.lgamma(p.alpha)
    out = np.empty(n + 1)
    for i in range(n + 1):
        z = (i + 1) * k + i * step + 1.0
        if not z > 0:
            raise ValueError(
                f"beta argument (i+1)k + i(alpha+1-gamma_w) + 1 = {z} is "
                f"nonpositive at index i={i}"
            )
        out[i] = log_beta(p.alpha, z) - lg_alpha
    return out


def apriori_products(
    n: int, p: FracParams, hyp: HypothesisData, l: float
) -> tuple:
    """(P_n, u_n): the n-th bound product and the n-th series term.

    P_n = prod_{i=0}^{n} B(alpha, (i+1)k + i(alpha+1-gamma_w) + 1)/Gamma(alpha)
    and u_n = A^(n+1) * M * l^((n+2)(alpha+k+1-gamma_w)) * P_(n+1).  Both are
    accumulated in log space; u_n may underflow to 0 for large n, which is
    the honest double-precision value.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    factors = _log_product_factors(n + 1, p, hyp)
    log_pn = float(factors[: n + 1].sum())
    if hyp.bound_M == 0.0:
        return math.exp(log_pn), 0.0
    exponent = p.alpha + hyp.exponent_k + 1.0 - p.gamma_w
    log_term = (
        math.log(hyp.bound_M)
        + (n + 1) * math.log(hyp.lipschitz_A)
        + (n + 2) * exponent * math.log(l)
        + float(factors.sum())
    )
    return math.exp(log_pn), math.exp(log_term)


def apriori_log_terms(
    n_max: int, p: FracParams, hyp: HypothesisData, l: float
) -> np.ndarray:
    """log u_n for n = 0..n_max; -inf throughout when M = 0."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    factors = _log_product_factors(n_max + 1, p, hyp)
    log_p = np.cumsum(factors)  # log P_i at index i
    n = np.arange(n_max + 1)
    log_m = math.log(hyp.bound_M) if hyp.bound_M > 0 else -math.inf
    exponent = p.alpha + hyp.exponent_k + 1.0 - p.gamma_w
    return (
        log_m
        + (n + 1) * math.log(hyp.lipschitz_A)
        + (n + 2) * exponent * math.log(l)
        + log_p[1:]
    )


def ratio_sequence(
    n_max: int, p: FracParams, hyp: HypothesisData, l: float
) -> np.ndarray:
    """Ratios r_n = u_(n+1)/u_n of the bound series for n = 1..n_max.

    Computed from log-space terms.  The ratios tend to 0, which is what makes
    the bound series summable.  A right-hand side with M = 0 has an
    identically zero series; that degenerate case raises rather than
    returning 0/0 noise.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    if hyp.bound_M == 0.0:
        raise DegenerateSeriesError(
            "all a-priori terms are zero (bound_M = 0); ratios are undefined"
        )
    logs = apriori_log_terms(n_max + 1, p, hyp, l)
    if not np.all(np.isfinite(logs)):
        n_bad = int(np.argmin(np.isfinite(logs)))
        raise DegenerateSeriesError(
            f"a-priori term underflowed in log space at n={n_bad}"
        )
    return np.exp(np.diff(logs))[1:]


# --- hypothesis spot checks ------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    """Observed worst-case ratios against the declared constants.

    A falsification check over deterministic low-discrepancy samples, not a
    proof: growth_ratio_max is max |f|/u^k, lipschitz_ratio_max is
    max |f(x1)-f(x2)| / (u^k |w1-w2|); a flag is set when the observed ratio
    exceeds the declared constant by more than 1%.
    """

    samples: int
    growth_ratio_max: float
    lipschitz_ratio_max: float
    growth_violation: bool
    lipschitz_violation: bool
    failures: tuple


def _halton(index: int, base: int) -> float:
    f = 1.0
    r = 0.0
    while index > 0:
        f /= base
        r += f * (index % base)
        index //= base
    return r


def verify_hypotheses(spec: ProblemSpec, sample_count: int = 256) -> HypothesisReport:
    """Spot-check the declared growth and Lipschitz constants of f.

    Samples (t, w1, w2) over (a, a+h] x ball^2 with a Halton sequence
    (bases 2, 3, 5), evaluates f at the unweighted arguments u^(gamma_w-1)*w,
    and reports the maximal observed ratios.
    """
    if sample_count < 10:
        raise ValueError(f"sample_count must be >= 10, got {sample_count}")
    p, hyp = spec.params, spec.hyp
    gw1 = p.gamma_w - 1.0
    growth_max = 0.0
    lips_max = 0.0
    failures = []
    for i in range(1, sample_count + 1):
        t = p.a + hyp.horizon_h * _halton(i, 2)  # halton is in (0, 1): t > a
        u = to_u(t, p)
        w1 = spec.x_a + hyp.ball_radius * (2.0 * _halton(i, 3) - 1.0)
        w2 = spec.x_a + hyp.ball_radius * (2.0 * _halton(i, 5) - 1.0)
        uk = u**hyp.exponent_k
        try:
            f1 = expressions.evaluate(spec.f, t=t, x=u**gw1 * w1, u=u)
            f2 = expressions.evaluate(spec.f, t=t, x=u**gw1 * w2, u=u)
        except expressions.EvalError as exc:
            failures.append(f"sample {i} (t={t!r}): {exc}")
            continue
        growth_max = max(growth_max, abs(f1) / uk)
        if abs(w1 - w2) > 1e-12:
            lips_max = max(lips_max, abs(f1 - f2) / (uk * abs(w1 - w2)))
    return HypothesisReport(
        samples=sample_count,
        growth_ratio_max=growth_max,
        lipschitz_ratio_max=lips_max,
        growth_violation=growth_max > 1.01 * hyp.bound_M,
        lipschitz_violation=lips_max > 1.01 * hyp.lipschitz_A,
        failures=tuple(failures),
    )
