"""Minimum-power layered multicast with superposition coding and SIC.

A macro station (id 0) and up to M femto stations transmit a layered packet
stream. Each user requests exactly one layer per slot and listens to exactly
one station; it decodes and cancels all lower layers first, so the residual
interference seen at layer l is the station's cumulative power above l. For a
station m serving user sets U_1..U_L the minimum cumulative powers obey the
backward recursion

    Q_{L+1} = 0,   Q_l = f(Q_{l+1}, U_l)

with f defined in :func:`f_step`, and fold into the closed form

    Q_1 = N0 * Gamma * sum_l (1 + Gamma)^{c_l} * max_{k in U_l} 1/H_k

where the running exponent c_l counts the nonempty layers below l. The
solvers in this module pick which stations transmit each layer so that the
summed cumulative powers are (near) minimal.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np


def snr_threshold(target_rate_bps: float, bandwidth_hz: float) -> float:
    """SNR needed to sustain target_rate over bandwidth: 2^(R/B) - 1."""
    if target_rate_bps < 0:
        raise ValueError("target rate must be non-negative")
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return 2.0 ** (target_rate_bps / bandwidth_hz) - 1.0


def snr_thresholds(target_rate_bps: float, bandwidths_hz) -> np.ndarray:
    """Per-station thresholds for a common target rate."""
    return np.array([snr_threshold(target_rate_bps, b) for b in bandwidths_hz])


@dataclass(frozen=True)
class LevelDemand:
    """Per-slot demand: which layer each user requests and who covers them.

    user_level[k] in 1..num_levels is the layer user k requests; coverage[k]
    is the femto station covering user k, with 0 meaning macro-only reach.
    """

    num_levels: int
    user_level: tuple
    coverage: tuple

    def __post_init__(self):
        if self.num_levels < 1:
            raise ValueError("need at least one layer")
        if len(self.user_level) != len(self.coverage):
            raise ValueError("user_level and coverage must have one entry per user")
        if len(self.user_level) == 0:
            raise ValueError("need at least one user")
        bad = [l for l in self.user_level if not 1 <= l <= self.num_levels]
        if bad:
            raise ValueError(f"requested layers out of range: {bad}")
        if any(c < 0 for c in self.coverage):
            raise ValueError("coverage entries must be >= 0")

    @property
    def num_users(self) -> int:
        return len(self.user_level)

    def users_at(self, level: int) -> tuple:
        return tuple(k for k, l in enumerate(self.user_level) if l == level)

    def eligible(self, level: int, station: int) -> tuple:
        """Users of the layer that station could serve (macro serves anyone)."""
        if station == 0:
            return self.users_at(level)
        return tuple(
            k for k, l in enumerate(self.user_level) if l == level and self.coverage[k] == station
        )

    def options(self, user: int) -> tuple:
        """Stations user may listen to: the macro, plus its femto if covered."""
        c = self.coverage[user]
        return (0,) if c == 0 else (0, c)


@dataclass(frozen=True)
class LevelAssignment:
    """Connection decision: serving[k] is the station user k listens to."""

    demand: LevelDemand
    serving: tuple

    def __post_init__(self):
        if len(self.serving) != self.demand.num_users:
            raise ValueError("need one serving station per user")
        for k, m in enumerate(self.serving):
            if m not in self.demand.options(k):
                raise ValueError(f"user {k} cannot listen to station {m}")

    def users_of(self, station: int, level: int) -> tuple:
        return tuple(
            k
            for k, (l, m) in enumerate(zip(self.demand.user_level, self.serving))
            if l == level and m == station
        )

    def served_mask(self, n_stations: int) -> np.ndarray:
        """(n_stations, L) booleans: station m transmits layer l."""
        mask = np.zeros((n_stations, self.demand.num_levels), dtype=bool)
        for l, m in zip(self.demand.user_level, self.serving):
            mask[m, l - 1] = True
        return mask

    def exponents(self, n_stations: int) -> np.ndarray:
        """Running exponents c[m, l-1]: nonempty layers of station m below l."""
        mask = self.served_mask(n_stations)
        c = np.zeros_like(mask, dtype=int)
        c[:, 1:] = np.cumsum(mask[:, :-1], axis=1)
        return c


@dataclass(frozen=True)
class PowerAllocation:
    """Cumulative and per-layer powers for every station.

    cumulative[m, i] is the power station m spends on layers i+1..L, so
    column 0 holds the station totals and column L is identically zero.
    """

    cumulative: np.ndarray
    per_level: np.ndarray
    total: float
    noise: float


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    snr_slack: np.ndarray


@dataclass(frozen=True)
class PowerBounds:
    upper_tight: float
    upper_loose: float
    lower_tight: float
    lower_loose: float


def f_step(q_next: float, users, gains_row, gamma: float, noise: float) -> float:
    """One backward step of the cumulative-power recursion for one station.

    With no users at the layer the cumulative power passes through unchanged;
    otherwise the layer must clear SNR gamma at its worst user on top of the
    residual q_next, costing max_k { noise*gamma/H_k + (1+gamma)*q_next }.
    """
    if q_next < 0:
        raise ValueError("cumulative power cannot be negative")
    if gamma < 0:
        raise ValueError("SNR threshold cannot be negative")
    users = tuple(users)
    if not users:
        return q_next
    worst = max(1.0 / gains_row[k] for k in users)
    return noise * gamma * worst + (1.0 + gamma) * q_next


def _level_buckets(assignment: LevelAssignment):
    """users grouped by (station, level), one linear pass."""
    buckets = {}
    for k, (l, m) in enumerate(zip(assignment.demand.user_level, assignment.serving)):
        buckets.setdefault((m, l), []).append(k)
    return buckets


def total_power(
    assignment: LevelAssignment, gains: np.ndarray, thresholds, noise: float
) -> PowerAllocation:
    """Minimum powers for a fixed assignment, by the backward recursion."""
    gains = np.asarray(gains, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    _check_inputs(assignment.demand, gains, thresholds, noise)
    n_stations = gains.shape[0]
    L = assignment.demand.num_levels
    buckets = _level_buckets(assignment)

    q = np.zeros((n_stations, L + 1))
    for m in range(n_stations):
        for l in range(L, 0, -1):
            q[m, l - 1] = f_step(
                q[m, l], buckets.get((m, l), ()), gains[m], thresholds[m], noise
            )
    per_level = q[:, :-1] - q[:, 1:]
    return PowerAllocation(
        cumulative=q, per_level=per_level, total=float(q[:, 0].sum()), noise=noise
    )


def folded_total(
    assignment: LevelAssignment, gains: np.ndarray, thresholds, noise: float
) -> float:
    """Total power again, via the folded closed form (independent route).

    sum over stations and their nonempty layers of
    noise * Gamma_m * (1+Gamma_m)^{c_l^m} * max_{k} 1/H_m^k.
    """
    gains = np.asarray(gains, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    _check_inputs(assignment.demand, gains, thresholds, noise)
    n_stations = gains.shape[0]
    c = assignment.exponents(n_stations)
    buckets = _level_buckets(assignment)
    total = 0.0
    for (m, l), users in buckets.items():
        worst = max(1.0 / gains[m, k] for k in users)
        total += noise * thresholds[m] * (1.0 + thresholds[m]) ** c[m, l - 1] * worst
    return total


def verify_feasible(
    allocation: PowerAllocation,
    assignment: LevelAssignment,
    gains: np.ndarray,
    thresholds,
    rel_tol: float = 1e-9,
) -> FeasibilityReport:
    """Check every user's post-cancellation SNR against its station threshold.

    The slack for user k served layer l by station m is
    H*P_l/(noise + H*Q_{l+1}) - Gamma_m; feasible means every slack is above
    -rel_tol (relative to max(Gamma, 1)).
    """
    gains = np.asarray(gains, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    K = assignment.demand.num_users
    slack = np.empty(K)
    feasible = True
    for k in range(K):
        m = assignment.serving[k]
        l = assignment.demand.user_level[k]
        h = gains[m, k]
        p = allocation.per_level[m, l - 1]
        residual = allocation.cumulative[m, l]
        snr = h * p / (allocation.noise + h * residual)
        slack[k] = snr - thresholds[m]
        if slack[k] < -rel_tol * max(1.0, thresholds[m]):
            feasible = False
    return FeasibilityReport(feasible=feasible, snr_slack=slack)


def _geom_sum(gamma: float, n: int) -> float:
    """((1+gamma)^n - 1)/gamma, continued as n at gamma=0."""
    if gamma == 0.0:
        return float(n)
    return ((1.0 + gamma) ** n - 1.0) / gamma


def bounds(
    demand: LevelDemand,
    gains: np.ndarray,
    thresholds,
    noise: float,
    assignment: LevelAssignment = None,
) -> PowerBounds:
    """Closed-form sandwich around the minimum total power.

    Upper bounds price every layer of a feasible assignment (the heuristic
    one when none is given) at the station's overall worst served user with
    fully grown exponents. Lower bounds need no assignment: every layer must
    reach its bottleneck user through some eligible station, and with
    n_stations transmitters at most n_stations layers can be served at each
    exponent value, so the r-th largest per-layer floor pays at least
    (1+Gamma_min)^floor((r-1)/n_stations).
    """
    gains = np.asarray(gains, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    _check_inputs(demand, gains, thresholds, noise)
    if assignment is None:
        assignment = heuristic_assign(demand, gains)
    n_stations = gains.shape[0]
    L = demand.num_levels

    buckets = _level_buckets(assignment)
    gbar = np.zeros(n_stations)
    for (m, _l), users in buckets.items():
        gbar[m] = max(gbar[m], thresholds[m] * max(1.0 / gains[m, k] for k in users))
    upper_tight = noise * sum(gbar[m] * _geom_sum(thresholds[m], L) for m in range(n_stations))
    upper_loose = noise * float(gbar.max()) * n_stations * _geom_sum(float(thresholds.max()), L)

    gamma_min = float(thresholds.min())
    floors = []
    for l in range(1, L + 1):
        users = demand.users_at(l)
        if not users:
            continue
        floors.append(
            max(min(thresholds[m] / gains[m, k] for m in demand.options(k)) for k in users)
        )
    floors.sort(reverse=True)
    growth = [(1.0 + gamma_min) ** (r // n_stations) for r in range(len(floors))]
    lower_tight = noise * sum(f * g for f, g in zip(floors, growth))
    lower_loose = noise * (min(floors) if floors else 0.0) * sum(growth)
    return PowerBounds(
        upper_tight=float(upper_tight),
        upper_loose=float(upper_loose),
        lower_tight=float(lower_tight),
        lower_loose=float(lower_loose),
    )


def heuristic_assign(demand: LevelDemand, gains: np.ndarray) -> LevelAssignment:
    """Baseline: every user listens to its strongest eligible station.

    Ties go to the macro station (lower id), so runs are deterministic.
    """
    gains = np.asarray(gains, dtype=float)
    serving = []
    for k in range(demand.num_users):
        best = 0
        for m in demand.options(k)[1:]:
            if gains[m, k] > gains[best, k]:
                best = m
        serving.append(best)
    return LevelAssignment(demand=demand, serving=tuple(serving))


def solve_case1(
    demand: LevelDemand, gains: np.ndarray, thresholds, noise: float, station: int = 0
) -> PowerAllocation:
    """All users on one station: closed-form optimum.

    Q_l = noise * Gamma * sum over nonempty layers i >= l of
    (1+Gamma)^{(nonempty layers in [l, i))} * (worst 1/H at layer i).
    Empty layers pass through without exponent growth.
    """
    gains = np.asarray(gains, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    _check_inputs(demand, gains, thresholds, noise)
    for k in range(demand.num_users):
        if station not in demand.options(k):
            raise ValueError(f"station {station} does not cover user {k}")
    gamma = float(thresholds[station])
    L = demand.num_levels

    worst = np.zeros(L + 1)
    served = np.zeros(L + 1, dtype=bool)
    for l in range(1, L + 1):
        users = demand.users_at(l)
        if users:
            served[l] = True
            worst[l] = max(1.0 / gains[station, k] for k in users)

    n_stations = gains.shape[0]
    q = np.zeros((n_stations, L + 1))
    for l in range(1, L + 1):
        acc = 0.0
        for i in range(l, L + 1):
            if served[i]:
                grown = int(served[l:i].sum())
                acc += (1.0 + gamma) ** grown * worst[i]
        q[station, l - 1] = noise * gamma * acc
    per_level = q[:, :-1] - q[:, 1:]
    return PowerAllocation(
        cumulative=q, per_level=per_level, total=float(q[:, 0].sum()), noise=noise
    )


def solve_case2(demand: LevelDemand, gains: np.ndarray, thresholds, noise: float):
    """Macro + one femto with full overlap: per-layer marginal-cost choice.

    Walking layers bottom-up with running exponents c0, c1, the whole layer
    goes to the station with the smaller marginal cost
    Gamma_m * (1+Gamma_m)^{c_m} * (worst 1/H_m); ties prefer the macro.
    O(L) decisions, then one backward power pass.
    """
    gains = np.asarray(gains, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    _check_inputs(demand, gains, thresholds, noise)
    if gains.shape[0] != 2:
        raise ValueError("this solver handles exactly one femto station")
    if any(c != 1 for c in demand.coverage):
        raise ValueError("every user must be covered by the femto station")

    c = [0, 0]
    chosen = {}
    for l in range(1, demand.num_levels + 1):
        users = demand.users_at(l)
        if not users:
            continue
        w0 = max(1.0 / gains[0, k] for k in users)
        w1 = max(1.0 / gains[1, k] for k in users)
        cost0 = thresholds[0] * (1.0 + thresholds[0]) ** c[0] * w0
        cost1 = thresholds[1] * (1.0 + thresholds[1]) ** c[1] * w1
        pick = 0 if cost0 <= cost1 else 1
        chosen[l] = pick
        c[pick] += 1

    serving = tuple(chosen[l] for l in demand.user_level)
    assignment = LevelAssignment(demand=demand, serving=serving)
    return assignment, total_power(assignment, gains, thresholds, noise)


def solve_case3(demand: LevelDemand, gains: np.ndarray, thresholds, noise: float):
    """Macro + M femtos with partial coverage: greedy per-layer partitions.

    For each layer, femto stations are admitted in ascending order of their
    marginal cost Delta_m = Gamma_m*(1+Gamma_m)^{c_m}*(worst eligible 1/H_m),
    as long as admitting one strictly beats the best split found so far,
    where the macro covers everyone left over. Running exponents advance for
    every station that ends up transmitting the layer. O(M*L) decisions, then
    one backward power pass.
    """
    gains = np.asarray(gains, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    _check_inputs(demand, gains, thresholds, noise)
    n_stations = gains.shape[0]
    femtos = list(range(1, n_stations))

    c = [0] * n_stations
    serving = [None] * demand.num_users
    for l in range(1, demand.num_levels + 1):
        users = demand.users_at(l)
        if not users:
            continue

        def macro_cost(residual_users):
            if not residual_users:
                return 0.0
            worst = max(1.0 / gains[0, k] for k in residual_users)
            return thresholds[0] * (1.0 + thresholds[0]) ** c[0] * worst

        delta = [0.0] * n_stations
        delta[0] = macro_cost(users)
        for m in femtos:
            elig = demand.eligible(l, m)
            if elig:
                worst = max(1.0 / gains[m, k] for k in elig)
                delta[m] = thresholds[m] * (1.0 + thresholds[m]) ** c[m] * worst

        psi = set()
        best = delta[0]
        pending = list(femtos)
        while pending:
            mp = min(pending, key=lambda m: (delta[m], m))
            trial = psi | {mp}
            residual = [k for k in users if demand.coverage[k] not in trial]
            cand = sum(delta[m] for m in trial) + macro_cost(residual)
            if cand < best:
                psi = trial
                best = cand
            pending.remove(mp)

        macro_side = []
        for k in users:
            if demand.coverage[k] in psi:
                serving[k] = demand.coverage[k]
            else:
                serving[k] = 0
                macro_side.append(k)
        if macro_side:
            c[0] += 1
        for m in psi:
            c[m] += 1

    assignment = LevelAssignment(demand=demand, serving=tuple(serving))
    return assignment, total_power(assignment, gains, thresholds, noise)


def brute_force_multicast(
    demand: LevelDemand, gains: np.ndarray, thresholds, noise: float, max_users: int = 12
):
    """Exact optimum by enumerating every per-user connection choice.

    Cost is up to 2^K power evaluations, so instances are refused above
    max_users. Ties keep the lexicographically first assignment.
    """
    gains = np.asarray(gains, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    _check_inputs(demand, gains, thresholds, noise)
    K = demand.num_users
    if K > max_users:
        raise ValueError(f"brute force refused: {K} users exceeds the limit of {max_users}")

    best = None
    options = [demand.options(k) for k in range(K)]
    for serving in itertools.product(*options):
        assignment = LevelAssignment(demand=demand, serving=serving)
        allocation = total_power(assignment, gains, thresholds, noise)
        if best is None or allocation.total < best[1].total:
            best = (assignment, allocation)
    return best


def _check_inputs(demand: LevelDemand, gains: np.ndarray, thresholds, noise: float) -> None:
    if gains.ndim != 2:
        raise ValueError("gains must be a (stations, users) matrix")
    n_stations, n_users = gains.shape
    if n_users != demand.num_users:
        raise ValueError(f"gains give {n_users} users, demand has {demand.num_users}")
    if len(thresholds) != n_stations:
        raise ValueError("need one SNR threshold per station")
    if np.any(gains <= 0):
        raise ValueError("channel gains must be positive")
    if np.any(np.asarray(thresholds) < 0):
        raise ValueError("SNR thresholds cannot be negative")
    if noise <= 0:
        raise ValueError("noise power must be positive")
    if any(c >= n_stations for c in demand.coverage):
        raise ValueError("coverage refers to stations outside the gain matrix")
