"""Couplings of discrete measures and exact quadratic transport.

A coupling stores the full plan matrix against its two marginals and is
validated on construction. The Wasserstein-2 solver is a transportation
network simplex over the plan polytope: spanning-tree basis, Bland's
anti-cycling entering rule, dual potentials rebuilt from the tree each
pivot, and a complementary-slackness certificate at termination. The
same solver doubles as the linear-minimization oracle for the
Frank-Wolfe search over couplings with a prescribed mixed frame
operator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimMismatch, MarginalMismatch, ProbFramesError, Unsupported
from .measures import DiscreteMeasure, group_atoms, COALESCE_TOL
from .numerics import as_matrix

MARGINAL_TOL = 1e-10
CERTIFICATE_TOL = 1e-9


@dataclass(frozen=True)
class Coupling:
    """Joint distribution with prescribed marginals.

    plan[i, j] is the mass moved from source atom i to target atom j.
    Rows must sum to the source weights and columns to the target
    weights within MARGINAL_TOL; entries must be nonnegative.
    """

    source: DiscreteMeasure
    target: DiscreteMeasure
    plan: np.ndarray

    def __post_init__(self):
        plan = np.asarray(self.plan, dtype=float)
        if plan.shape != (self.source.size, self.target.size):
            raise DimMismatch(
                f"plan shape {plan.shape} does not match "
                f"({self.source.size}, {self.target.size}) atoms"
            )
        if not np.all(np.isfinite(plan)):
            raise MarginalMismatch("plan has non-finite entries")
        if plan.size and plan.min() < 0.0:
            raise MarginalMismatch(f"plan has negative entry {plan.min():.3e}")
        row_err = float(np.abs(plan.sum(axis=1) - self.source.weights).max())
        col_err = float(np.abs(plan.sum(axis=0) - self.target.weights).max())
        if row_err > MARGINAL_TOL or col_err > MARGINAL_TOL:
            raise MarginalMismatch(
                f"marginal errors (rows {row_err:.3e}, cols {col_err:.3e}) "
                f"exceed {MARGINAL_TOL:.0e}"
            )
        plan.setflags(write=False)
        object.__setattr__(self, "plan", plan)


@dataclass(frozen=True)
class TransportResult:
    """Optimal quadratic transport between two measures."""

    cost: float
    w2: float
    plan: Coupling


def product_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    """Independent coupling mu x nu."""
    return Coupling(mu, nu, np.outer(mu.weights, nu.weights))


def graph_coupling(mu: DiscreteMeasure, images) -> Coupling:
    """Coupling concentrated on the graph of an atom-indexed map.

    images[i] is where atom i goes; colliding images are merged into a
    single target atom whose plan column collects the incoming mass.
    """
    imgs = np.asarray(images, dtype=float)
    if imgs.ndim == 1:
        imgs = imgs.reshape(-1, 1)
    if imgs.shape[0] != mu.size:
        raise DimMismatch(f"need {mu.size} images, got {imgs.shape[0]}")
    reps, assign = group_atoms(imgs, COALESCE_TOL)
    weights = np.zeros(len(reps))
    plan = np.zeros((mu.size, len(reps)))
    for i, g in enumerate(assign):
        weights[g] += mu.weights[i]
        plan[i, g] = mu.weights[i]
    target = DiscreteMeasure(imgs[reps], weights)
    return Coupling(mu, target, plan)


def push_target(c: Coupling, images) -> Coupling:
    """Apply a map to the target side of a coupling, keeping the plan.

    This is the pushforward of the coupling under (x, y) -> (x, T y)
    with T given extensionally on the target atoms. Colliding images are
    merged and their plan columns summed.
    """
    imgs = np.asarray(images, dtype=float)
    if imgs.ndim == 1:
        imgs = imgs.reshape(-1, 1)
    if imgs.shape[0] != c.target.size:
        raise DimMismatch(f"need {c.target.size} images, got {imgs.shape[0]}")
    reps, assign = group_atoms(imgs, COALESCE_TOL)
    weights = np.zeros(len(reps))
    plan = np.zeros((c.source.size, len(reps)))
    for j, g in enumerate(assign):
        weights[g] += c.target.weights[j]
        plan[:, g] += c.plan[:, j]
    target = DiscreteMeasure(imgs[reps], weights)
    return Coupling(c.source, target, plan)


def mixed_frame_operator(c: Coupling) -> np.ndarray:
    """Second mixed moment sum_ij plan_ij x_i y_j^T."""
    return c.source.atoms.T @ c.plan @ c.target.atoms


def _sq_dists(mu: DiscreteMeasure, nu: DiscreteMeasure) -> np.ndarray:
    if mu.dim != nu.dim:
        raise DimMismatch(
            f"measures live in dimensions {mu.dim} and {nu.dim}"
        )
    return cdist(mu.atoms, nu.atoms, "sqeuclidean")


def transport_cost(c: Coupling) -> float:
    """Quadratic cost of a coupling: sum_ij plan_ij |x_i - y_j|^2."""
    return float((c.plan * _sq_dists(c.source, c.target)).sum())


# ---------------------------------------------------------------------------
# transportation network simplex


def _northwest_tree(a: np.ndarray, b: np.ndarray) -> list[tuple[int, int]]:
    """Northwest-corner spanning tree: m + n - 1 arcs, possibly degenerate."""
    m, n = a.shape[0], b.shape[0]
    basis = []
    ra, rb = a.copy(), b.copy()
    i = j = 0
    while True:
        basis.append((i, j))
        t = min(ra[i], rb[j])
        ra[i] -= t
        rb[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if j == n - 1 or (ra[i] <= rb[j] and i < m - 1):
            i += 1
        else:
            j += 1
    return basis


def _tree_flows(
    m: int, n: int, adj: dict[int, set[int]], a: np.ndarray, b: np.ndarray
) -> dict[tuple[int, int], float]:
    """Unique arc flows on a spanning tree supporting the marginals.

    Computed by leaf elimination directly from a and b, so the returned
    flows carry no pivot roundoff. Row nodes are 0..m-1, column nodes
    m..m+n-1.
    """
    net = np.concatenate([a, -b])
    neighbors = {k: set(v) for k, v in adj.items()}
    leaves = [k for k in range(m + n) if len(neighbors[k]) == 1]
    flows: dict[tuple[int, int], float] = {}
    while leaves:
        u = leaves.pop()
        if not neighbors[u]:
            continue
        w = next(iter(neighbors[u]))
        arc = (u, w - m) if u < m else (w, u - m)
        flows[arc] = net[u] if u < m else -net[u]
        net[w] += net[u]
        neighbors[w].discard(u)
        neighbors[u].clear()
        if len(neighbors[w]) == 1:
            leaves.append(w)
    return flows


def _clamp_dust(flows: dict[tuple[int, int], float]):
    """Zero out the sub-roundoff negatives a degenerate basis produces."""
    for arc, f in flows.items():
        if f < 0.0:
            flows[arc] = 0.0


def _tree_duals(
    m: int, n: int, adj: dict[int, set[int]], cost: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Potentials with u_i + v_j = cost_ij on every tree arc, u_0 = 0."""
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    stack = [0]
    while stack:
        k = stack.pop()
        if k < m:
            for w in adj[k]:
                j = w - m
                if math.isnan(v[j]):
                    v[j] = cost[k, j] - u[k]
                    stack.append(w)
        else:
            j = k - m
            for w in adj[k]:
                if math.isnan(u[w]):
                    u[w] = cost[w, j] - v[j]
                    stack.append(w)
    return u, v


def _transport_simplex(
    a: np.ndarray, b: np.ndarray, cost: np.ndarray, start=None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[tuple[int, int]]]:
    """Minimize <cost, plan> over the transportation polytope.

    Returns (plan, u, v, basis) with u, v the dual potentials and basis
    the optimal spanning tree, reusable as the start of a neighboring
    solve (any spanning tree is feasible for any cost matrix with the
    same marginals). Pricing is most-negative reduced cost, falling back
    to Bland's rule (first negative cell in row-major order) whenever a
    run of degenerate pivots suggests stalling; Bland's rule cannot
    cycle, so the fallback guarantees termination. Potentials are
    updated incrementally on the subtree cut off by the leaving arc. The
    leaving arc is the minimum-ratio cell with lexicographic tie-break,
    and the final flows are recomputed from the marginals on the optimal
    tree.
    """
    m, n = cost.shape
    eps = 1e-12 * max(1.0, float(np.abs(cost).max()))
    basis = set(start) if start is not None else set(_northwest_tree(a, b))
    adj: dict[int, set[int]] = {k: set() for k in range(m + n)}
    for (i, j) in basis:
        adj[i].add(m + j)
        adj[m + j].add(i)
    flows = _tree_flows(m, n, adj, a, b)
    u, v = _tree_duals(m, n, adj, cost)
    if start is not None and (
        len(basis) != m + n - 1
        or len(flows) != m + n - 1
        or min(flows.values()) < -1e-9
        or not (np.all(np.isfinite(u)) and np.all(np.isfinite(v)))
    ):
        # the provided tree does not span or is infeasible here; fall
        # back to a fresh start
        basis = set(_northwest_tree(a, b))
        adj = {k: set() for k in range(m + n)}
        for (i, j) in basis:
            adj[i].add(m + j)
            adj[m + j].add(i)
        flows = _tree_flows(m, n, adj, a, b)
        u, v = _tree_duals(m, n, adj, cost)
    _clamp_dust(flows)

    reduced = np.empty_like(cost)
    stall_limit = 30 + (m + n) // 2
    stalled = 0
    max_pivots = 1000 + 100 * (m + n) * max(m, n)
    for _ in range(max_pivots):
        np.subtract(cost, u[:, None], out=reduced)
        reduced -= v[None, :]
        if stalled <= stall_limit:
            flat = int(reduced.argmin())
            if reduced.flat[flat] >= -eps:
                break
        else:
            candidates = np.flatnonzero((reduced < -eps).ravel())
            if candidates.size == 0:
                break
            flat = int(candidates[0])
        ei, ej = divmod(flat, n)
        delta = float(reduced[ei, ej])

        # unique tree path from row node ei to column node m + ej
        parent: dict[int, int | None] = {ei: None}
        stack = [ei]
        while (m + ej) not in parent:
            k = stack.pop()
            for w in adj[k]:
                if w not in parent:
                    parent[w] = k
                    stack.append(w)
        path = [m + ej]
        while path[-1] != ei:
            path.append(parent[path[-1]])
        path.reverse()

        # cells along the cycle alternate signs, starting at -1 next to
        # the entering cell (ei, ej)
        minus: list[tuple[int, int]] = []
        plus: list[tuple[int, int]] = []
        for k in range(len(path) - 1):
            p, q = path[k], path[k + 1]
            arc = (p, q - m) if p < m else (q, p - m)
            (minus if k % 2 == 0 else plus).append(arc)
        theta = min(flows[arc] for arc in minus)
        leaving = min(arc for arc in minus if flows[arc] <= theta)
        stalled = stalled + 1 if theta <= 0.0 else 0

        for arc in plus:
            flows[arc] += theta
        for arc in minus:
            flows[arc] -= theta
        flows[(ei, ej)] = theta
        del flows[leaving]
        basis.remove(leaving)
        basis.add((ei, ej))
        adj[leaving[0]].discard(m + leaving[1])
        adj[m + leaving[1]].discard(leaving[0])

        # removing the leaving arc separates ei from m + ej; shift the
        # potentials of the component holding m + ej by the old reduced
        # cost so the entering arc becomes tight
        comp = {m + ej}
        stack = [m + ej]
        while stack:
            k = stack.pop()
            for w in adj[k]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        for k in comp:
            if k < m:
                u[k] -= delta
            else:
                v[k - m] += delta
        adj[ei].add(m + ej)
        adj[m + ej].add(ei)
    else:
        raise ProbFramesError("transportation simplex failed to terminate")

    # final flows recomputed from the marginals, so the plan is exact
    flows = _tree_flows(m, n, adj, a, b)
    _clamp_dust(flows)
    plan = np.zeros((m, n))
    for (i, j), f in flows.items():
        plan[i, j] = f
    return plan, u, v, sorted(basis)


def _certify(plan: np.ndarray, u: np.ndarray, v: np.ndarray, cost: np.ndarray):
    """Optimality check: dual feasibility and complementary slackness."""
    scale = max(1.0, float(np.abs(cost).max()))
    reduced = cost - u[:, None] - v[None, :]
    infeas = max(0.0, float(-reduced.min()))
    slack = float(np.abs(plan * reduced).sum())
    if infeas > CERTIFICATE_TOL * scale or slack > CERTIFICATE_TOL * scale:
        raise ProbFramesError(
            f"optimality certificate failed (infeasibility {infeas:.3e}, "
            f"slackness {slack:.3e})"
        )


def solve_w2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportResult:
    """Exact Wasserstein-2 distance and an optimal plan."""
    d = _sq_dists(mu, nu)
    plan, u, v, _ = _transport_simplex(mu.weights, nu.weights, d)
    _certify(plan, u, v, d)
    cost = float((plan * d).sum())
    return TransportResult(
        cost=cost, w2=math.sqrt(max(cost, 0.0)), plan=Coupling(mu, nu, plan)
    )


def w2_bruteforce(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportResult:
    """Exhaustive W2 for small uniform measures, as an independent oracle.

    Restricted to equal atom counts N <= 7 with uniform weights, where
    the optimal plan is a permutation matrix scaled by 1/N and all N!
    assignments can be enumerated.
    """
    n = mu.size
    if n != nu.size or n > 7:
        raise Unsupported("bruteforce needs equal atom counts, at most 7")
    for w in (mu.weights, nu.weights):
        if float(np.abs(w - 1.0 / n).max()) > 1e-12:
            raise Unsupported("bruteforce needs uniform weights")
    d = _sq_dists(mu, nu)
    best_cost = math.inf
    best_perm = None
    rows = np.arange(n)
    for perm in itertools.permutations(range(n)):
        c = float(d[rows, perm].sum()) / n
        if c < best_cost:
            best_cost = c
            best_perm = perm
    plan = np.zeros((n, n))
    plan[rows, best_perm] = 1.0 / n
    return TransportResult(
        cost=best_cost,
        w2=math.sqrt(max(best_cost, 0.0)),
        plan=Coupling(mu, nu, plan),
    )


def glue(c12: Coupling, c23: Coupling) -> Coupling:
    """Compose couplings through a shared middle marginal.

    c12 couples mu1 to mu2 and c23 couples mu2 to mu3; the middle
    measures must agree atom by atom. The result is the standard gluing,
    which disintegrates c23 along the middle marginal.
    """
    mid_a, mid_b = c12.target, c23.source
    if mid_a.size != mid_b.size or mid_a.dim != mid_b.dim:
        raise MarginalMismatch("middle marginals have different supports")
    atom_err = float(np.linalg.norm(mid_a.atoms - mid_b.atoms, axis=1).max())
    weight_err = float(np.abs(mid_a.weights - mid_b.weights).max())
    if atom_err > MARGINAL_TOL or weight_err > MARGINAL_TOL:
        raise MarginalMismatch(
            f"middle marginals disagree (atoms {atom_err:.3e}, "
            f"weights {weight_err:.3e})"
        )
    rows = c23.plan.sum(axis=1)
    if float(rows.min()) <= 0.0:
        raise MarginalMismatch("middle marginal carries a zero-mass atom")
    plan = c12.plan @ (c23.plan / rows[:, None])
    return Coupling(c12.source, c23.target, plan)


@dataclass(frozen=True)
class MixedOperatorSearch:
    """Outcome of the mixed-operator Frank-Wolfe search."""

    coupling: Coupling
    residual: float
    gap: float
    iterations: int
    residuals: list[float] = field(repr=False)


def optimize_mixed_operator(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    target,
    iters: int = 10000,
    tol: float = 1e-8,
) -> MixedOperatorSearch:
    """Search the coupling polytope for a prescribed mixed frame operator.

    Minimizes |mixed_frame_operator(plan) - target|_F^2 by Frank-Wolfe
    with the transportation simplex as linear oracle and exact line
    search. Stops when the duality gap certifies the squared residual is
    within tol of the polytope optimum, or after iters iterations. The
    residual sequence is nonincreasing.
    """
    t_mat = as_matrix(target)
    x, y = mu.atoms, nu.atoms
    if t_mat.shape != (mu.dim, nu.dim):
        raise DimMismatch(
            f"target shape {t_mat.shape} does not match ({mu.dim}, {nu.dim})"
        )
    plan = np.outer(mu.weights, nu.weights)
    mixed = x.T @ plan @ y
    residuals: list[float] = []
    gap = math.inf
    iterations = 0
    basis = None
    for iterations in range(1, iters + 1):
        r = mixed - t_mat
        residuals.append(float(np.linalg.norm(r)))
        grad = 2.0 * x @ r @ y.T
        vertex, _, _, basis = _transport_simplex(
            mu.weights, nu.weights, grad, start=basis
        )
        gap = float((grad * (plan - vertex)).sum())
        if gap <= tol:
            break
        step_dir = x.T @ vertex @ y - mixed
        denom = float((step_dir * step_dir).sum())
        if denom == 0.0:
            break
        t = min(1.0, max(0.0, -float((r * step_dir).sum()) / denom))
        if t == 0.0:
            break
        plan = plan + t * (vertex - plan)
        mixed = mixed + t * step_dir
    residual = float(np.linalg.norm(mixed - t_mat))
    residuals.append(residual)
    return MixedOperatorSearch(
        coupling=Coupling(mu, nu, plan),
        residual=residual,
        gap=gap,
        iterations=iterations,
        residuals=residuals,
    )


def coupling_to_dict(c: Coupling) -> dict:
    from .measures import measure_to_dict

    return {
        "source": measure_to_dict(c.source),
        "target": measure_to_dict(c.target),
        "plan": [[float(v) for v in row] for row in c.plan],
    }


def coupling_from_dict(d: dict) -> Coupling:
    from .measures import measure_from_dict

    for key in ("source", "target", "plan"):
        if key not in d:
            raise MarginalMismatch(f"coupling document lacks '{key}'")
    return Coupling(
        measure_from_dict(d["source"]),
        measure_from_dict(d["target"]),
        np.asarray(d["plan"], dtype=float),
    )
