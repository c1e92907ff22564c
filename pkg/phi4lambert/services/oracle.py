"""
Fixed-Point Oracle Service

An independent check of the closed form: the integral equation at finite
cutoff Lambda^2 solved by damped fixed-point iteration on a quadrature grid,
and the residual of the equation at infinite cutoff for any supplied G.

At finite cutoff, with l_x = log((Lambda^2 - x)/x), the equation rearranges to

    G(a,b) = (1 + lambda A)(1 + lambda B) / (a + b + mu^2 + lambda l_a + lambda l_b + lambda^2 D)

where A, B are principal-value transforms of G in the first and second
argument and D is their composition. The grid update applies this map.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from phi4lambert.config import get_settings
from phi4lambert.exceptions import DomainError, FixedPointError
from phi4lambert.logger import get_logger
from phi4lambert.schemas import GridFunction, QuadSpec, ResidualReport
from phi4lambert.services.closedform import G_array
from phi4lambert.services.domains import LAMBDA_RADIUS
from phi4lambert.services.quadrature import gauss_legendre_rule, integrate

logger = get_logger(__name__)

# Grid values beyond this mean the iteration is running away
DIVERGENCE_GUARD = 1e6
MIN_NODES = 16
# Damping backs off after this many consecutive increases of the update norm
BACKOFF_AFTER = 5
DAMPING_FLOOR = 1e-3

TwoPoint = Callable[[ArrayLike, ArrayLike], ArrayLike]


@dataclass(frozen=True)
class PVGrid:
    """Nodes on (0, cutoff) with weights and the principal-value matrix."""

    cutoff: float
    s: NDArray[np.float64]  # Legendre nodes on [-1, 1]
    bary: NDArray[np.float64]  # barycentric weights of s
    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]
    ell: NDArray[np.float64]
    pv: NDArray[np.float64]
    mu2: float = 0.0

    @property
    def size(self) -> int:
        return int(self.nodes.size)


def _node_map(cutoff: float, s: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """x = cutoff t/(1 + beta(1-t)), t = (1+s)/2, beta = sqrt(cutoff); returns x and dx/ds."""
    beta = math.sqrt(cutoff)
    t = 0.5 * (1.0 + s)
    den = 1.0 + beta * (1.0 - t)
    return cutoff * t / den, 0.5 * cutoff * (1.0 + beta) / den**2


def _barycentric_matrix(
    s: NDArray[np.float64], bary: NDArray[np.float64], targets: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Interpolation matrix from values at s to values at targets."""
    diff = targets[:, None] - s[None, :]
    exact = diff == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = bary[None, :] / diff
        matrix = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    matrix[hit] = exact[hit].astype(float)
    return matrix


def _differentiation_matrix(s: NDArray[np.float64], bary: NDArray[np.float64]) -> NDArray[np.float64]:
    diff = s[:, None] - s[None, :]
    np.fill_diagonal(diff, 1.0)
    matrix = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(matrix, 0.0)
    np.fill_diagonal(matrix, -matrix.sum(axis=1))
    return matrix


@lru_cache(maxsize=16)
def pv_grid(cutoff: float, n_nodes: int, lam: float = 0.0) -> PVGrid:
    """
    Discretization of (0, cutoff) with n_nodes mapped Gauss-Legendre nodes.

    The principal-value matrix acts as
        (M g)_i = sum_{j != i} w_j (g_j - g_i)/(x_j - x_i) + w_i g'(x_i) + l_i g_i
    with g' from the interpolating polynomial, so M 1 = l exactly.
    """
    if cutoff <= 0:
        raise DomainError("cutoff must be positive", details={"cutoff": cutoff})
    if n_nodes < MIN_NODES:
        raise DomainError(f"need at least {MIN_NODES} nodes", details={"n_nodes": n_nodes})

    s, w_s = np.polynomial.legendre.leggauss(n_nodes)
    bary = (-1.0) ** np.arange(n_nodes) * np.sqrt((1.0 - s**2) * w_s)
    x, jac = _node_map(cutoff, s)
    w = w_s * jac
    ell = np.log((cutoff - x) / x)

    gap = x[None, :] - x[:, None]
    np.fill_diagonal(gap, 1.0)
    cauchy = w[None, :] / gap
    np.fill_diagonal(cauchy, 0.0)
    d_x = _differentiation_matrix(s, bary) / jac[:, None]
    pv = cauchy + np.diag(ell - cauchy.sum(axis=1)) + w[:, None] * d_x

    mu2 = 1.0 - 2.0 * lam * math.log1p(cutoff)
    return PVGrid(cutoff=cutoff, s=s, bary=bary, nodes=x, weights=w, ell=ell, pv=pv, mu2=mu2)


def fixed_point_map(values: NDArray[np.float64], lam: float, grid: PVGrid) -> NDArray[np.float64]:
    """One application of the finite-cutoff equation solved for G."""
    m = grid.pv
    first = m @ values
    second = values @ m.T
    both = first @ m.T
    x, ell = grid.nodes, grid.ell
    den = x[:, None] + x[None, :] + grid.mu2 + lam * (ell[:, None] + ell[None, :]) + lam**2 * both
    return (1.0 + lam * first) * (1.0 + lam * second) / den


def _free_grid(grid: PVGrid) -> NDArray[np.float64]:
    x = grid.nodes
    return 1.0 / (1.0 + x[:, None] + x[None, :])


def solve_fixed_point(
    lam: float,
    cutoff: float,
    n_nodes: int = 64,
    damping: float | None = None,
    tol: float | None = None,
    max_iter: int | None = None,
    initial: NDArray[np.float64] | None = None,
) -> GridFunction:
    """
    Solve the finite-cutoff equation by damped iteration G <- (1-d) G + d F(G).

    The grid starts from the free propagator G0 = 1/(1+a+b) unless an
    initial grid is given. Each step applies the discretized equation once
    (fixed_point_map) and moves a fraction d of the way towards the result.
    At lambda = 0 the map returns G0 itself, so the free case stops after
    the first evaluation.

    The damping d is not changed while the update norm shrinks or wobbles.
    Only a run of BACKOFF_AFTER consecutive increases halves it, never below
    DAMPING_FLOOR, and it grows back towards the requested value as soon as
    the norm falls again. The returned values are symmetrized; the
    iteration itself preserves symmetry only up to rounding.

    Uniqueness is not claimed for the discrete equation. Use
    probe_initial_conditions() to see whether other starting grids land on
    the same fixed point.

    Usage:
        solution = solve_fixed_point(0.5, 100.0, n_nodes=64)
        deviation, count = closed_form_deviation(solution)


    Raises:
        DomainError: If lambda <= -1/log 4 or the grid is too small
        FixedPointError: On divergence or when max_iter is reached
    """
    settings = get_settings()
    damping = damping if damping is not None else settings.oracle_damping
    tol = tol if tol is not None else settings.oracle_tol
    max_iter = max_iter if max_iter is not None else settings.oracle_max_iter
    if lam <= -LAMBDA_RADIUS:
        raise DomainError("solve_fixed_point requires lambda > -1/log 4", details={"lambda": lam})
    if not 0 < damping <= 1:
        raise DomainError("damping must lie in (0, 1]", details={"damping": damping})

    grid = pv_grid(float(cutoff), int(n_nodes), float(lam))
    values = _free_grid(grid) if initial is None else np.array(initial, dtype=float)
    if values.shape != (grid.size, grid.size):
        raise DomainError("initial grid has the wrong shape", details={"shape": list(values.shape)})

    logger.info(f"Fixed point at lambda={lam:g}, cutoff={cutoff:g}, nodes={n_nodes}")
    base, previous, rising = damping, math.inf, 0
    for iteration in range(1, max_iter + 1):
        update = fixed_point_map(values, lam, grid) - values
        change = float(np.max(np.abs(update)))
        if change <= tol:
            logger.info(f"Converged after {iteration} iterations (residual {change:.3e})")
            return GridFunction(
                cutoff=cutoff,
                nodes=grid.nodes.tolist(),
                weights=grid.weights.tolist(),
                values=(0.5 * (values + values.T)).tolist(),
                lam=lam,
                tol=tol,
                iterations=iteration,
                residual=change,
            )
        rising = rising + 1 if change > previous else 0
        if rising >= BACKOFF_AFTER and damping > DAMPING_FLOOR:
            damping = max(0.5 * damping, DAMPING_FLOOR)
            rising = 0
            logger.warning(f"Update norm grew for {BACKOFF_AFTER} iterations at {iteration}: damping -> {damping:g}")
        elif change < previous and damping < base:
            damping = min(1.25 * damping, base)
        previous = change
        values = values + damping * update

        if not np.all(np.isfinite(values)) or float(np.max(np.abs(values))) > DIVERGENCE_GUARD:
            raise FixedPointError(
                "Fixed-point iteration diverged",
                details={"lambda": lam, "cutoff": cutoff, "iteration": iteration},
            )

    raise FixedPointError(
        "Fixed-point iteration did not converge",
        details={"lambda": lam, "cutoff": cutoff, "max_iter": max_iter, "last_residual": previous},
    )


def refined_residual(grid_function: GridFunction, lam: float) -> float:
    """
    Discretization monitor: interpolate the converged grid onto twice as many
    nodes, apply the map there and report the largest change back at the
    original nodes.
    """
    coarse = pv_grid(grid_function.cutoff, len(grid_function.nodes), float(lam))
    fine = pv_grid(grid_function.cutoff, 2 * coarse.size, float(lam))
    up = _barycentric_matrix(coarse.s, coarse.bary, fine.s)
    down = _barycentric_matrix(fine.s, fine.bary, coarse.s)

    values = grid_function.as_array()
    mapped = fixed_point_map(up @ values @ up.T, lam, fine)
    back = down @ mapped @ down.T
    return float(np.max(np.abs(back - values)))


def probe_initial_conditions(
    lam: float, cutoff: float, n_nodes: int = 64, scales: Sequence[float] = (0.5, 1.0, 2.0)
) -> tuple[bool, float]:
    """
    Solve from c G0 for each scale c and report whether all runs reach the
    same fixed point, with the largest pairwise spread.
    """
    grid = pv_grid(float(cutoff), int(n_nodes), float(lam))
    tol = get_settings().oracle_tol
    solutions = [
        solve_fixed_point(lam, cutoff, n_nodes, initial=scale * _free_grid(grid)).as_array() for scale in scales
    ]
    spread = max(float(np.max(np.abs(sol - solutions[0]))) for sol in solutions)
    agree = spread <= 100 * tol
    if not agree:
        logger.warning(f"Initial conditions reach different fixed points (spread {spread:.3e})")
    return agree, spread


def closed_form_deviation(solution: GridFunction) -> tuple[float, int]:
    """Max |G_oracle - G| over the nodes with a, b <= cutoff/4, and how many nodes that is."""
    x = np.asarray(solution.nodes)
    interior = x <= solution.cutoff / 4.0
    xi = x[interior]
    if not xi.size:
        return 0.0, 0
    closed = np.asarray(G_array(xi[:, None], xi[None, :], solution.lam)[0])
    oracle = solution.as_array()[np.ix_(interior, interior)]
    return float(np.max(np.abs(oracle - closed))), int(xi.size)


def compare_oracle_to_closedform(
    lam: float, cutoffs: Sequence[float], n_nodes: int = 64
) -> list[tuple[float, float]]:
    """
    Max deviation between the finite-cutoff solution and the closed-form G
    on the interior nodes, for each cutoff. The deviation should shrink as
    the cutoff grows; a warning is logged when it does not.
    """
    results: list[tuple[float, float]] = []
    for cutoff in cutoffs:
        deviation, count = closed_form_deviation(solve_fixed_point(lam, cutoff, n_nodes))
        logger.info(f"cutoff={cutoff:g}: max deviation {deviation:.3e} on {count} interior nodes")
        results.append((float(cutoff), deviation))

    deviations = [d for _, d in results]
    if any(later > earlier for earlier, later in zip(deviations, deviations[1:])):
        logger.warning(f"Deviation does not decrease with the cutoff: {deviations}")
    return results


# ---------------------------------------------------------------------------
# Residual of the infinite-cutoff equation
# ---------------------------------------------------------------------------


def _single_term(g: TwoPoint, a: float, b: float, g_ab: float, spec: QuadSpec, first: bool) -> float:
    """int_0^inf [(g(p,b) - g(a,b))/(p - a) + g(a,b)/(1+p)] dp, or the same in the second slot."""
    pole = a if first else b

    def at(p: float) -> float:
        return float(g(p, b) if first else g(a, p))  # type: ignore[arg-type]

    step = 1e-5 * max(1.0, pole)
    slope = (at(pole + step) - at(max(pole - step, 0.0))) / (step + min(step, pole))

    def integrand(p: float) -> float:
        if p == pole:
            return slope + g_ab / (1.0 + p)
        return (at(p) - g_ab) / (p - pole) + g_ab / (1.0 + p)

    return integrate(integrand, 0.0, math.inf, spec, points=[pole] if pole > 0 else None).number.real


def _split_rule(pole: float, cutoff: float, order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    count = max(1, math.ceil(math.log2(cutoff / 1e-6)))
    edges = np.concatenate(([0.0], np.geomspace(1e-6, cutoff, count + 1)))
    if 0 < pole < cutoff:
        edges = np.union1d(edges, [pole])
    return gauss_legendre_rule(edges, order)


def residual(
    g: TwoPoint,
    a: float,
    b: float,
    lam: float,
    spec: QuadSpec | None = None,
    cutoff: float = 1e6,
    order: int = 16,
) -> ResidualReport:
    """
    Residual of the infinite-cutoff equation for a supplied two-point function.

        (1+a+b) g(a,b) = 1 + lambda int dp [(g(p,b)-g(a,b))/(p-a) + g(a,b)/(1+p)]
                           + lambda int dq [(g(a,q)-g(a,b))/(q-b) + g(a,b)/(1+q)]
                           - lambda^2 int int [g(a,b)g(p,q) - g(a,q)g(p,b)]/((p-a)(q-b))

    g must accept numpy arrays and broadcast. The single integrals are
    adaptive over the half-line. The double integral runs on a tensor
    Gauss-Legendre grid over [0, cutoff]^2 whose panels end at p = a and
    q = b, so the antisymmetric numerator is divided only where it is
    regular; its tail beyond the cutoff is estimated from the edge strips.
    """
    spec = spec or QuadSpec.from_settings()
    if a < 0 or b < 0:
        raise DomainError("residual requires a, b >= 0", details={"a": a, "b": b})

    g_ab = float(g(a, b))  # type: ignore[arg-type]
    lhs = (1.0 + a + b) * g_ab
    rhs = 1.0
    tail = 0.0
    if lam != 0:
        rhs += lam * (_single_term(g, a, b, g_ab, spec, True) + _single_term(g, a, b, g_ab, spec, False))

        p, wp = _split_rule(a, cutoff, order)
        q, wq = _split_rule(b, cutoff, order)
        g_pq = np.asarray(g(p[:, None], q[None, :]), dtype=float)
        g_aq = np.asarray(g(a, q), dtype=float)
        g_pb = np.asarray(g(p, b), dtype=float)
        kernel = (g_ab * g_pq - g_aq[None, :] * g_pb[:, None]) / ((p - a)[:, None] * (q - b)[None, :])
        double = float(wp @ kernel @ wq)

        g_cq = np.asarray(g(cutoff, q), dtype=float)
        g_pc = np.asarray(g(p, cutoff), dtype=float)
        g_cb, g_ac = float(g(cutoff, b)), float(g(a, cutoff))  # type: ignore[arg-type]
        strip_p = float(((g_ab * g_cq - g_aq * g_cb) / ((cutoff - a) * (q - b))) @ wq)
        strip_q = float(wp @ ((g_ab * g_pc - g_ac * g_pb) / ((p - a) * (cutoff - b))))
        tail_value = cutoff * (strip_p + strip_q)
        rhs -= lam**2 * (double + tail_value)
        tail = lam**2 * abs(tail_value)

    abs_residual = abs(lhs - rhs)
    return ResidualReport(
        a=a,
        b=b,
        lam=lam,
        lhs=lhs,
        rhs=rhs,
        abs_residual=abs_residual,
        rel_residual=abs_residual / max(abs(lhs), 1e-300),
        tail_estimate=tail,
    )


def closed_form_two_point(lam: float) -> TwoPoint:
    """The closed-form G at fixed lambda as a broadcasting callable for residual()."""

    def g(a: ArrayLike, b: ArrayLike) -> ArrayLike:
        return G_array(a, b, lam)[0]  # type: ignore[return-value]

    return g
