"""Per-slot video scheduling by dual decomposition, plus channel allocation.

Each slot maximizes a sum of expected log-quality terms over per-user time
shares on the macro station's common channel and on each femto station's
pool of licensed channels, subject to unit time budgets per transmitter and
a single-transceiver constraint per user. Relaxing the time budgets with
prices decouples the problem per user, whose best response is closed-form;
prices follow a projected gradient iteration. At the optimum every user's
branch choice is binary, so the relaxation loses nothing.

When femto stations interfere, licensed channels are handed out by a greedy
marginal-value rule on (femto, channel) pairs; the value of an allocation is
the scheduling objective it enables, measured against the no-channel
baseline so the greedy trace telescopes exactly.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class SlotProblem:
    """One slot's scheduling inputs.

    Per user: current quality w_minus, delivery success probabilities to the
    macro (pbar_mbs) and its own femto (pbar_fbs), quality rates per unit
    time share (rate_mbs; rate_fbs additionally scales with the femto's
    expected available channels), and the owning femto assoc in 1..n_fbs.
    fbs_gi holds the expected available channel count per femto.
    """

    w_minus: np.ndarray
    pbar_mbs: np.ndarray
    pbar_fbs: np.ndarray
    rate_mbs: np.ndarray
    rate_fbs: np.ndarray
    assoc: np.ndarray
    n_fbs: int
    fbs_gi: np.ndarray

    def __post_init__(self):
        self.w_minus = np.asarray(self.w_minus, dtype=float)
        self.pbar_mbs = np.asarray(self.pbar_mbs, dtype=float)
        self.pbar_fbs = np.asarray(self.pbar_fbs, dtype=float)
        self.rate_mbs = np.asarray(self.rate_mbs, dtype=float)
        self.rate_fbs = np.asarray(self.rate_fbs, dtype=float)
        self.assoc = np.asarray(self.assoc, dtype=int)
        self.fbs_gi = np.asarray(self.fbs_gi, dtype=float)
        k = self.w_minus.shape[0]
        if k < 1:
            raise ValueError("need at least one user")
        for name in ("pbar_mbs", "pbar_fbs", "rate_mbs", "rate_fbs", "assoc"):
            if getattr(self, name).shape != (k,):
                raise ValueError(f"{name} must have one entry per user")
        if self.n_fbs < 1:
            raise ValueError("need at least one femto station")
        if self.fbs_gi.shape != (self.n_fbs,):
            raise ValueError("fbs_gi must have one entry per femto station")
        if np.any(self.w_minus <= 0):
            raise ValueError("current quality must be positive")
        for name in ("pbar_mbs", "pbar_fbs"):
            p = getattr(self, name)
            if np.any((p < 0) | (p > 1)):
                raise ValueError(f"{name} must be probabilities")
        if np.any(self.rate_mbs < 0) or np.any(self.rate_fbs < 0):
            raise ValueError("rates cannot be negative")
        if np.any((self.assoc < 1) | (self.assoc > self.n_fbs)):
            raise ValueError("assoc entries must be femto ids in 1..n_fbs")
        if np.any(self.fbs_gi < 0):
            raise ValueError("expected channel counts cannot be negative")

    @property
    def num_users(self) -> int:
        return self.w_minus.shape[0]


@dataclass
class ScheduleSolution:
    """Primal schedule plus solver diagnostics.

    connect_mbs is the binary branch choice per user; the losing branch's
    time share is zero. For heuristic schedules the dual fields are NaN.
    """

    connect_mbs: np.ndarray
    rho_mbs: np.ndarray
    rho_fbs: np.ndarray
    objective: float
    dual_value: float
    duality_gap: float
    iterations: int
    converged: bool
    prices: np.ndarray
    trace: "list | None" = None


def _scalar_share(pbar: float, price: float, w: float, rate: float) -> float:
    """argmax of pbar*log(w + rho*rate) - price*rho over rho in [0, 1].

    The whole-slot bound stays inside the per-user subproblem: it is a valid
    constraint on its own, it keeps the relaxation tight, and it bounds how
    much the load can jump when a user switches branches. The interior
    stationary point is pbar/price - w/rate, clipped to the box.
    """
    if rate <= 0.0:
        return 0.0
    if price <= 0.0:
        return 1.0
    return min(max(pbar / price - w / rate, 0.0), 1.0)


def user_subproblem(user: int, prices, problem: SlotProblem, gi=None):
    """Closed-form best response of one user to the current prices.

    Evaluates both branches with their waterfilling shares and keeps the one
    with the larger Lagrangian contribution; ties go to the macro station.
    Returns (connect_mbs, rho_mbs, rho_fbs) with the losing share zeroed.
    """
    gi = problem.fbs_gi if gi is None else np.asarray(gi, dtype=float)
    w = float(problem.w_minus[user])
    i = int(problem.assoc[user])
    r0 = float(problem.rate_mbs[user])
    rf = float(problem.rate_fbs[user] * gi[i - 1])
    pb0 = float(problem.pbar_mbs[user])
    pbf = float(problem.pbar_fbs[user])
    rho0 = _scalar_share(pb0, prices[0], w, r0)
    rhof = _scalar_share(pbf, prices[i], w, rf)
    v0 = pb0 * math.log(w + rho0 * r0) - prices[0] * rho0
    vf = pbf * math.log(w + rhof * rf) - prices[i] * rhof
    if v0 >= vf:
        return True, rho0, 0.0
    return False, 0.0, rhof


def dual_update(prices, load, step: float):
    """Projected gradient step on the prices: [lam - step*(1 - load)]^+."""
    if step <= 0:
        raise ValueError("step size must be positive")
    return np.maximum(np.asarray(prices, dtype=float) - step * (1.0 - np.asarray(load, dtype=float)), 0.0)


def objective_value(problem: SlotProblem, connect_mbs, rho_mbs, rho_fbs, gi=None) -> float:
    """Expected log-quality sum of a feasible schedule."""
    gi = problem.fbs_gi if gi is None else np.asarray(gi, dtype=float)
    connect_mbs = np.asarray(connect_mbs, dtype=bool)
    g_user = gi[problem.assoc - 1]
    arg = np.where(
        connect_mbs,
        problem.w_minus + np.asarray(rho_mbs, dtype=float) * problem.rate_mbs,
        problem.w_minus + np.asarray(rho_fbs, dtype=float) * g_user * problem.rate_fbs,
    )
    if np.any(arg <= 0):
        raise ValueError("log argument must stay positive")
    weight = np.where(connect_mbs, problem.pbar_mbs, problem.pbar_fbs)
    return float(np.sum(weight * np.log(arg)))


def _vector_share(pbar, price_user, w, rate):
    rho = np.zeros_like(w)
    pos = rate > 0
    priced = pos & (price_user > 0)
    rho[priced] = np.minimum(
        np.maximum(pbar[priced] / price_user[priced] - w[priced] / rate[priced], 0.0), 1.0
    )
    rho[pos & (price_user == 0)] = 1.0
    return rho


def _best_responses(problem: SlotProblem, g_user, prices):
    """All users' best responses at once. Returns branch, shares, values."""
    w = problem.w_minus
    price0 = np.full(problem.num_users, prices[0])
    pricef = prices[problem.assoc]
    rf = problem.rate_fbs * g_user
    rho0 = _vector_share(problem.pbar_mbs, price0, w, problem.rate_mbs)
    rhof = _vector_share(problem.pbar_fbs, pricef, w, rf)
    v0 = problem.pbar_mbs * np.log(w + rho0 * problem.rate_mbs) - price0 * rho0
    vf = problem.pbar_fbs * np.log(w + rhof * rf) - pricef * rhof
    connect = v0 >= vf
    rho0 = np.where(connect, rho0, 0.0)
    rhof = np.where(connect, 0.0, rhof)
    values = np.where(connect, v0, vf)
    return connect, rho0, rhof, values


def _load(problem: SlotProblem, rho_mbs, rho_fbs):
    load = np.zeros(problem.n_fbs + 1)
    load[0] = rho_mbs.sum()
    load[1:] = np.bincount(problem.assoc, weights=rho_fbs, minlength=problem.n_fbs + 1)[1:]
    return load


def _repaired(rho_mbs, rho_fbs, load, assoc, tol: float = 1e-6):
    """Scale any transmitter's shares down when their sum exceeds the slot."""
    scale = np.ones_like(load)
    over = load > 1.0 + tol
    scale[over] = 1.0 / load[over]
    return rho_mbs * scale[0], rho_fbs * scale[assoc]


def _pool_shares(pbar, w, rate, iters: int = 60):
    """Optimal shares for users bound to one transmitter: bisect the pool
    price until the box-clipped stationary shares fill the slot."""
    shares = np.zeros_like(w)
    pos = rate > 0
    if not np.any(pos):
        return shares
    pb, wa, ra = pbar[pos], w[pos], rate[pos]
    offset = wa / ra
    hi = float(np.max(pb * ra / wa)) * 2.0 + 1.0
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        total = np.minimum(np.maximum(pb / mid - offset, 0.0), 1.0).sum()
        if total >= 1.0:
            lo = mid
        else:
            hi = mid
    filled = np.minimum(np.maximum(pb / hi - offset, 0.0), 1.0)
    total = filled.sum()
    if total > 1.0:
        filled = filled / total
    shares[pos] = filled
    return shares


def _refill_pattern(problem: SlotProblem, g_user, connect):
    """Best feasible shares for a fixed branch pattern: waterfill each
    transmitter's pool independently."""
    connect = np.asarray(connect, dtype=bool)
    rho0 = np.zeros(problem.num_users)
    rhof = np.zeros(problem.num_users)
    if np.any(connect):
        rho0[connect] = _pool_shares(
            problem.pbar_mbs[connect], problem.w_minus[connect], problem.rate_mbs[connect]
        )
    rf = problem.rate_fbs * g_user
    for i in range(1, problem.n_fbs + 1):
        pool = (~connect) & (problem.assoc == i)
        if np.any(pool):
            rhof[pool] = _pool_shares(
                problem.pbar_fbs[pool], problem.w_minus[pool], rf[pool]
            )
    return rho0, rhof


def init_prices(problem: SlotProblem, gi=None) -> np.ndarray:
    """Cold-start prices at each transmitter's demand threshold.

    A pool's clearing price never exceeds its users' largest marginal
    utility at zero share and never falls below the largest at full share;
    starting at the latter puts the iteration on the problem's own price
    scale instead of an arbitrary constant, which matters when quality
    rates are small against current quality.
    """
    gi = problem.fbs_gi if gi is None else np.asarray(gi, dtype=float)
    rf = problem.rate_fbs * gi[problem.assoc - 1]
    prices = np.zeros(problem.n_fbs + 1)
    prices[0] = float(
        np.max(problem.pbar_mbs * problem.rate_mbs / (problem.w_minus + problem.rate_mbs))
    )
    for i in range(1, problem.n_fbs + 1):
        pool = problem.assoc == i
        if np.any(pool):
            prices[i] = float(
                np.max(problem.pbar_fbs[pool] * rf[pool] / (problem.w_minus[pool] + rf[pool]))
            )
    return prices


def solve_noninterfering(
    problem: SlotProblem,
    gi=None,
    prices_init=None,
    step: float = 0.01,
    phi: float = 1e-6,
    max_iters: int = 10000,
    record_trace: bool = False,
) -> ScheduleSolution:
    """Price iteration for one slot with a fixed per-femto channel vector.

    Stops when the squared price movement drops to phi. On convergence the
    final iterate (after the feasibility repair) is returned; otherwise the
    best feasible iterate seen, flagged converged=False. A warm start from
    the previous slot's prices goes through prices_init.
    """
    if phi < 0:
        raise ValueError("phi cannot be negative")
    if max_iters < 1:
        raise ValueError("need at least one iteration")
    gi = problem.fbs_gi if gi is None else np.asarray(gi, dtype=float)
    g_user = gi[problem.assoc - 1]
    prices = (
        np.ones(problem.n_fbs + 1)
        if prices_init is None
        else np.array(prices_init, dtype=float)
    )
    if prices.shape != (problem.n_fbs + 1,) or np.any(prices < 0):
        raise ValueError("prices_init must be a nonnegative price per transmitter")

    trace = [] if record_trace else None
    best = None
    best_dual = math.inf
    patterns = {}
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        connect, rho0, rhof, values = _best_responses(problem, g_user, prices)
        best_dual = min(best_dual, float(values.sum() + prices.sum()))
        overflow = len(patterns) >= 128
        if not overflow:
            patterns.setdefault(connect.tobytes(), connect)
        load = _load(problem, rho0, rhof)
        if record_trace or overflow:
            # refilling a visited pattern dominates any repaired iterate of
            # it, so iterates only matter for the trace and for patterns
            # beyond the bookkeeping cap
            r0, rf = _repaired(rho0, rhof, load, problem.assoc)
            obj = objective_value(problem, connect, r0, rf, gi)
            if best is None or obj > best[0]:
                best = (obj, connect, r0, rf)
            if record_trace:
                trace.append((iterations, prices.copy(), obj))
        new_prices = dual_update(prices, load, step)
        moved = float(((new_prices - prices) ** 2).sum())
        prices = new_prices
        if moved <= phi:
            converged = True
            break

    connect, rho0, rhof, values = _best_responses(problem, g_user, prices)
    dual = min(best_dual, float(values.sum() + prices.sum()))
    patterns.setdefault(connect.tobytes(), connect)
    chosen = best
    # primal recovery: the dual iteration fixes each visited branch pattern,
    # and the continuous inner problem for a fixed pattern splits into
    # independent per-transmitter waterfilling problems solved exactly
    for pattern in patterns.values():
        r0, rf = _refill_pattern(problem, g_user, pattern)
        obj = objective_value(problem, pattern, r0, rf, gi)
        if chosen is None or obj > chosen[0]:
            chosen = (obj, pattern, r0, rf)
    # primal polish: the returned point is the best feasible point known,
    # so a finite stopping tolerance never leaves it below a baseline
    for candidate in (heuristic_equal(problem, gi), heuristic_diversity(problem, gi)):
        if candidate.objective > chosen[0]:
            chosen = (
                candidate.objective,
                candidate.connect_mbs,
                candidate.rho_mbs,
                candidate.rho_fbs,
            )
    gap = abs(dual - chosen[0]) / max(abs(dual), 1e-12)
    return ScheduleSolution(
        connect_mbs=chosen[1],
        rho_mbs=chosen[2],
        rho_fbs=chosen[3],
        objective=chosen[0],
        dual_value=dual,
        duality_gap=gap,
        iterations=iterations,
        converged=converged,
        prices=prices,
        trace=trace,
    )


def solve_single_fbs(problem: SlotProblem, **solver_opts) -> ScheduleSolution:
    """Special case of one femto station sharing all licensed channels."""
    if problem.n_fbs != 1:
        raise ValueError("single-femto solver needs exactly one femto station")
    return solve_noninterfering(problem, **solver_opts)


def _preferred_mbs(problem: SlotProblem, g_user) -> np.ndarray:
    """Per-user transmitter preference by link quality; macro wins ties and
    whenever the femto has no channels to offer."""
    return (problem.pbar_mbs >= problem.pbar_fbs) | (g_user == 0)


def _heuristic_solution(problem, connect, rho0, rhof, gi) -> ScheduleSolution:
    return ScheduleSolution(
        connect_mbs=connect,
        rho_mbs=rho0,
        rho_fbs=rhof,
        objective=objective_value(problem, connect, rho0, rhof, gi),
        dual_value=float("nan"),
        duality_gap=float("nan"),
        iterations=0,
        converged=True,
        prices=None,
    )


def heuristic_equal(problem: SlotProblem, gi=None) -> ScheduleSolution:
    """Baseline: users pick the better link, transmitters split time evenly."""
    gi = problem.fbs_gi if gi is None else np.asarray(gi, dtype=float)
    g_user = gi[problem.assoc - 1]
    connect = _preferred_mbs(problem, g_user)
    rho0 = np.zeros(problem.num_users)
    rhof = np.zeros(problem.num_users)
    n_mbs = int(connect.sum())
    if n_mbs:
        rho0[connect] = 1.0 / n_mbs
    for i in range(1, problem.n_fbs + 1):
        pool = (~connect) & (problem.assoc == i)
        n_i = int(pool.sum())
        if n_i:
            rhof[pool] = 1.0 / n_i
    return _heuristic_solution(problem, connect, rho0, rhof, gi)


def heuristic_diversity(problem: SlotProblem, gi=None) -> ScheduleSolution:
    """Baseline: users pick the better link, each transmitter then gives its
    whole slot to its best-link chooser; everyone else idles."""
    gi = problem.fbs_gi if gi is None else np.asarray(gi, dtype=float)
    g_user = gi[problem.assoc - 1]
    connect = _preferred_mbs(problem, g_user)
    rho0 = np.zeros(problem.num_users)
    rhof = np.zeros(problem.num_users)
    if np.any(connect):
        best = int(np.argmax(np.where(connect, problem.pbar_mbs, -1.0)))
        rho0[best] = 1.0
    for i in range(1, problem.n_fbs + 1):
        pool = (~connect) & (problem.assoc == i)
        if np.any(pool):
            best = int(np.argmax(np.where(pool, problem.pbar_fbs, -1.0)))
            rhof[best] = 1.0
    return _heuristic_solution(problem, connect, rho0, rhof, gi)


@dataclass(frozen=True)
class InterferenceGraph:
    """Which femto stations would collide if they reused a channel."""

    n_fbs: int
    edges: tuple

    def __post_init__(self):
        if self.n_fbs < 1:
            raise ValueError("need at least one femto station")
        seen = set()
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"edge {e} must have two endpoints")
            i, j = e
            if not (1 <= i < j <= self.n_fbs):
                raise ValueError(f"edge ({i}, {j}) must satisfy 1 <= i < j <= {self.n_fbs}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    def neighbors(self, fbs: int) -> frozenset:
        out = set()
        for i, j in self.edges:
            if i == fbs:
                out.add(j)
            elif j == fbs:
                out.add(i)
        return frozenset(out)

    def degree(self, fbs: int) -> int:
        return len(self.neighbors(fbs))

    @property
    def d_max(self) -> int:
        return max((self.degree(i) for i in range(1, self.n_fbs + 1)), default=0)

    def are_adjacent(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in {(a, b) for a, b in self.edges}


@dataclass
class ChannelAllocation:
    """0/1 matrix of (femto, cleared channel) grants."""

    channels: tuple
    p_idle: np.ndarray
    assigned: np.ndarray

    def gi(self) -> np.ndarray:
        """Expected available channels per femto under this allocation."""
        return self.assigned @ np.asarray(self.p_idle, dtype=float)

    def validate(self, graph: InterferenceGraph) -> None:
        if self.assigned.shape != (graph.n_fbs, len(self.channels)):
            raise ValueError("allocation matrix has the wrong shape")
        for i, j in graph.edges:
            both = self.assigned[i - 1] + self.assigned[j - 1]
            if np.any(both > 1):
                raise ValueError(f"femtos {i} and {j} share a channel across an edge")


@dataclass(frozen=True)
class GreedyStep:
    fbs: int
    channel: int
    delta: float
    degree: int


@dataclass
class GreedyTrace:
    """Marginal gains of the greedy allocation, in pick order.

    value is the improvement of the final allocation over no channels, and
    equals the sum of the deltas exactly (shared memoized evaluations).
    """

    steps: list
    value: float
    baseline: float


class AllocationValue:
    """Objective improvement enabled by a channel allocation.

    Evaluations run the price iteration at a configurable budget and are
    memoized by the per-femto expected-channel vector; candidate solves warm
    start from the allocation they extend. A custom solver callable
    (problem, gi, prices_init) -> (objective, prices_or_None) replaces the
    price iteration, e.g. with an exact enumeration on tiny instances.
    """

    def __init__(
        self,
        problem: SlotProblem,
        step: float = 0.01,
        phi: float = 1e-6,
        max_iters: int = 2000,
        solver=None,
    ):
        self.problem = problem
        self.step = step
        self.phi = phi
        self.max_iters = max_iters
        self._solver = solver
        self._cache = {}
        zero = np.zeros(problem.n_fbs)
        self.baseline, prices = self._solve(zero, None)
        self._cache[tuple(zero)] = (0.0, prices)

    def _solve(self, gi, prices_init):
        if self._solver is not None:
            return self._solver(self.problem, gi, prices_init)
        sol = solve_noninterfering(
            self.problem,
            gi=gi,
            prices_init=prices_init,
            step=self.step,
            phi=self.phi,
            max_iters=self.max_iters,
        )
        return sol.objective, sol.prices

    def improvement(self, gi, warm_key=None) -> float:
        key = tuple(float(g) for g in gi)
        hit = self._cache.get(key)
        if hit is not None:
            return hit[0]
        warm = self._cache.get(warm_key) if warm_key is not None else None
        objective, prices = self._solve(
            np.asarray(gi, dtype=float), None if warm is None else warm[1]
        )
        self._cache[key] = (objective - self.baseline, prices)
        return objective - self.baseline


def greedy_alloc(
    problem: SlotProblem,
    channels,
    p_idle,
    graph: InterferenceGraph,
    value: "AllocationValue | None" = None,
    **solver_opts,
):
    """Hand out (femto, channel) grants by largest marginal objective gain.

    After each pick the chosen pair and its graph neighbors on the same
    channel leave the candidate set, so edges never share a channel. Ties
    break to the lowest (femto, channel position). Returns the allocation
    and the step trace.
    """
    p_idle = np.asarray(p_idle, dtype=float)
    channels = tuple(channels)
    if p_idle.shape != (len(channels),):
        raise ValueError("need one idle posterior per cleared channel")
    if graph.n_fbs != problem.n_fbs:
        raise ValueError("interference graph and problem disagree on femto count")
    if value is None:
        value = AllocationValue(problem, **solver_opts)

    n = problem.n_fbs
    assigned = np.zeros((n, len(channels)), dtype=int)
    candidates = {(i, m) for i in range(1, n + 1) for m in range(len(channels))}
    steps = []
    current_value = 0.0
    current_key = tuple(assigned @ p_idle)
    while candidates:
        best_pair = None
        best_value = -math.inf
        for i, m in sorted(candidates):
            trial = assigned.copy()
            trial[i - 1, m] = 1
            v = value.improvement(trial @ p_idle, warm_key=current_key)
            if v > best_value:
                best_value = v
                best_pair = (i, m)
        i, m = best_pair
        steps.append(
            GreedyStep(
                fbs=i, channel=channels[m], delta=best_value - current_value, degree=graph.degree(i)
            )
        )
        assigned[i - 1, m] = 1
        current_value = best_value
        current_key = tuple(assigned @ p_idle)
        candidates.discard((i, m))
        for nbr in graph.neighbors(i):
            candidates.discard((nbr, m))

    alloc = ChannelAllocation(channels=channels, p_idle=p_idle, assigned=assigned)
    alloc.validate(graph)
    return alloc, GreedyTrace(steps=steps, value=current_value, baseline=value.baseline)


def brute_force_alloc(
    problem: SlotProblem,
    channels,
    p_idle,
    graph: InterferenceGraph,
    value: "AllocationValue | None" = None,
    max_pairs: int = 12,
    **solver_opts,
):
    """Exact best allocation by enumerating independent sets per channel.

    Refused when n_fbs * len(channels) exceeds max_pairs. Returns the best
    allocation and its improvement value; ties keep the first combination
    in enumeration order.
    """
    p_idle = np.asarray(p_idle, dtype=float)
    channels = tuple(channels)
    n = problem.n_fbs
    if n * len(channels) > max_pairs:
        raise ValueError(
            f"exhaustive allocation refused: {n * len(channels)} pairs exceeds the limit of {max_pairs}"
        )
    if value is None:
        value = AllocationValue(problem, **solver_opts)

    independent = []
    for mask in range(2 ** n):
        members = [i + 1 for i in range(n) if mask >> i & 1]
        if all(not graph.are_adjacent(i, j) for i, j in itertools.combinations(members, 2)):
            independent.append(tuple(members))

    zero_key = tuple(np.zeros(n))
    best = None
    for combo in itertools.product(independent, repeat=len(channels)):
        assigned = np.zeros((n, len(channels)), dtype=int)
        for m, members in enumerate(combo):
            for i in members:
                assigned[i - 1, m] = 1
        v = value.improvement(assigned @ p_idle, warm_key=zero_key)
        if best is None or v > best[0]:
            best = (v, assigned)
    alloc = ChannelAllocation(channels=channels, p_idle=p_idle, assigned=best[1])
    alloc.validate(graph)
    return alloc, best[0]


def optbound_upper(trace: GreedyTrace) -> float:
    """Upper bound on the best allocation's improvement:
    greedy value plus each step's delta counted again per graph neighbor."""
    return trace.value + sum(s.degree * s.delta for s in trace.steps)
