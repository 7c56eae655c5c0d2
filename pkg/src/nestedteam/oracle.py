"""Ground truth computed directly from the joint distribution.

Nothing in here uses the belief filters or the dynamic program to produce
its answers.  Expected costs and conditional distributions come from a
depth-first expansion of every primitive realization ``(x_0, w, v1, v2)``,
and optima come from enumerating strategy tables.

Memory nodes are keyed by index tuples::

    agent 2:  (y2_0..y2_t, u2_0..u2_{t-1})
    agent 1:  (y1_0..y1_t, u1_0..u1_{t-1}, y2_0..y2_t, u2_0..u2_{t-1})
"""

from __future__ import annotations

import itertools
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .beliefs import (
    Belief1,
    Belief2,
    NewInfo2,
    PrivateHistory,
    initial_belief1,
    initial_belief2,
    reconstruct_belief1,
    update_belief1,
    update_belief2,
)
from .dp import PolicyExecutor, SolvedPolicy, Solver, final_stage_equivalence_check
from .errors import MissingEntryError, NullEventError, ResourceBoundError
from .model import Distribution, TeamModel, fmt_rational, validate_model
from .prescriptions import enumerate_prescriptions

__all__ = [
    "BatteryRow",
    "DEFAULT_MAX_PROFILES",
    "Dims",
    "FilterReport",
    "SimulationResult",
    "StrategyProfile",
    "TrajectoryNode",
    "brute_force_belief1",
    "brute_force_belief2",
    "brute_force_optimal",
    "check_filters",
    "conditional_tables",
    "evaluate_strategy",
    "generate_random_instance",
    "profile_from_policy",
    "run_battery",
    "simulate",
    "structured_profile",
]

DEFAULT_MAX_PROFILES = 1_000_000


@dataclass
class StrategyProfile:
    """Control-law tables ``g1[t][m1_node] -> u1`` and ``g2[t][m2_node] -> u2``."""

    g1: tuple[dict, ...]
    g2: tuple[dict, ...]

    @classmethod
    def empty(cls, horizon: int) -> "StrategyProfile":
        return cls(tuple({} for _ in range(horizon + 1)), tuple({} for _ in range(horizon + 1)))

    def actions(self, t, m1_node):
        y1s, u1s, y2s, u2s = m1_node
        try:
            u1 = self.g1[t][m1_node]
        except KeyError:
            raise MissingEntryError(f"agent 1 has no action at t={t} for memory {m1_node}") from None
        try:
            u2 = self.g2[t][y2s, u2s]
        except KeyError:
            raise MissingEntryError(f"agent 2 has no action at t={t} for memory {(y2s, u2s)}") from None
        return u1, u2


@dataclass(frozen=True)
class TrajectoryNode:
    """A positive-probability partial realization, observed at ``t``, before acting at ``t``."""

    t: int
    states: tuple[int, ...]
    w: tuple[int, ...]
    v1: tuple[int, ...]
    v2: tuple[int, ...]
    y1: tuple[int, ...]
    y2: tuple[int, ...]
    u1: tuple[int, ...]
    u2: tuple[int, ...]
    prob: Fraction
    cost: Fraction

    @property
    def m1(self):
        return (self.y1, self.u1, self.y2, self.u2)

    @property
    def m2(self):
        return (self.y2, self.u2)

    @property
    def history(self) -> PrivateHistory:
        return PrivateHistory(self.y1, self.u1)


def walk(m: TeamModel, act: Callable, until: int | None = None, visit: Callable | None = None) -> Fraction:
    """Expand the joint tree under the control laws ``act(t, m1_node) -> (u1, u2)``.

    ``visit(node, u1, u2)`` sees every positive-probability decision point up
    to time ``until`` (default: the horizon).  Returns the exact expected total
    cost when the walk runs to the horizon.
    """
    T = m.horizon if until is None else until
    total = [Fraction(0)]

    def observe(t, x, prob, cost, hist):
        states, ws, v1s, v2s, y1s, y2s, u1s, u2s = hist
        h1, h2 = m.obs_fn1[t], m.obs_fn2[t]
        for v1, pv1 in m.v1[t].support():
            for v2, pv2 in m.v2[t].support():
                node = TrajectoryNode(t, states + (x,), ws, v1s + (v1,), v2s + (v2,),
                                      y1s + (h1[x, v1],), y2s + (h2[x, v2],), u1s, u2s,
                                      prob * pv1 * pv2, cost)
                decide(node)

    def decide(node):
        t = node.t
        u1, u2 = act(t, node.m1)
        if visit is not None:
            visit(node, u1, u2)
        x = node.states[-1]
        cost = node.cost + m.cost[t][x, u1, u2]
        if t == m.horizon:
            total[0] += node.prob * cost
            return
        if t == T:
            return
        f = m.transition[t]
        for w, pw in m.w[t].support():
            observe(t + 1, f[x, u1, u2, w], node.prob * pw, cost,
                    (node.states, node.w + (w,), node.v1, node.v2, node.y1, node.y2,
                     node.u1 + (u1,), node.u2 + (u2,)))

    for x, px in enumerate(m.x0):
        if px > 0:
            observe(0, x, px, Fraction(0), ((), (), (), (), (), (), (), ()))
    return total[0]


def evaluate_strategy(m: TeamModel, s: StrategyProfile) -> Fraction:
    """Exact expected total cost of a strategy profile."""
    return walk(m, s.actions)


# --------------------------------------------------------------------------
# brute-force conditionals


def conditional_tables(m: TeamModel, s: StrategyProfile, until: int | None = None):
    """Brute-force beliefs at every positive-probability memory node.

    Returns ``(b1, b2)``: ``b1[m1_node]`` is ``P(x_t | m1)`` and
    ``b2[m2_node]`` is ``P(x_t, l_t | m2)`` with ``l_t`` agent 1's private history.
    """
    w1: dict = defaultdict(lambda: defaultdict(Fraction))
    w2: dict = defaultdict(lambda: defaultdict(Fraction))

    def visit(node, u1, u2):
        x = node.states[-1]
        w1[node.m1][x] += node.prob
        w2[node.m2][x, node.history] += node.prob

    walk(m, s.actions, until=until, visit=visit)
    b1 = {k: Belief1.from_weights(v) for k, v in w1.items()}
    b2 = {k: Belief2.from_weights(len(k[0]) - 1, v) for k, v in w2.items()}
    return b1, b2


def _node_time(node) -> int:
    return len(node[0]) - 1


def brute_force_belief1(m: TeamModel, s: StrategyProfile, m1_node) -> Belief1:
    """``P(x_t | m1)`` by summing joint-tree leaves consistent with ``m1_node``."""
    t = _node_time(m1_node)
    weights: dict = defaultdict(Fraction)

    def visit(node, u1, u2):
        if node.t == t and node.m1 == m1_node:
            weights[node.states[-1]] += node.prob

    walk(m, s.actions, until=t, visit=visit)
    if not weights:
        raise NullEventError(f"memory node {m1_node} has zero probability")
    return Belief1.from_weights(weights)


def brute_force_belief2(m: TeamModel, s: StrategyProfile, m2_node) -> Belief2:
    """``P(x_t, l_t | m2)`` by summing joint-tree leaves consistent with ``m2_node``."""
    t = _node_time(m2_node)
    weights: dict = defaultdict(Fraction)

    def visit(node, u1, u2):
        if node.t == t and node.m2 == m2_node:
            weights[node.states[-1], node.history] += node.prob

    walk(m, s.actions, until=t, visit=visit)
    if not weights:
        raise NullEventError(f"memory node {m2_node} has zero probability")
    return Belief2.from_weights(t, weights)


# --------------------------------------------------------------------------
# brute-force optimum


def _obs_prob(m, agent, t, x, y):
    h = m.obs_fn(agent, t)
    return sum((p for v, p in m.noise(agent, t).items() if h[x, v] == y), Fraction(0))


class _Agent2Tree:
    """Agent-2 memory nodes that are reachable for at least one choice of agent 1's actions.

    This is a superset of the positive-probability nodes of any profile, so
    enumerating agent-2 tables over it loses nothing.
    """

    def __init__(self, m: TeamModel):
        self.m = m
        self._children = {}

    def roots(self):
        m = self.m
        out = []
        for y2 in range(len(m.obs2[0])):
            S = frozenset(x for x, p in enumerate(m.x0) if p > 0 and _obs_prob(m, 2, 0, x, y2) > 0)
            if S:
                out.append((((y2,), ()), S))
        return out

    def children(self, t, node, u2, S):
        key = (node, u2)
        if key in self._children:
            return self._children[key]
        m = self.m
        f = m.transition[t]
        nxt = set()
        for x in S:
            for u1 in range(len(m.actions1[t])):
                for w, _ in m.w[t].support():
                    nxt.add(f[x, u1, u2, w])
        out = []
        for y2 in range(len(m.obs2[t + 1])):
            S2 = frozenset(x for x in nxt if _obs_prob(m, 2, t + 1, x, y2) > 0)
            if S2:
                out.append(((node[0] + (y2,), node[1] + (u2,)), S2))
        self._children[key] = out
        return out

    def count(self, t, node, S) -> int:
        """Number of agent-2 tables on the subtree rooted at ``node``."""
        if t == self.m.horizon:
            return len(self.m.actions2[t])
        return sum(math.prod(self.count(t + 1, c, S2) for c, S2 in self.children(t, node, u2, S))
                   for u2 in range(len(self.m.actions2[t])))

    def tables(self, t, node, S):
        """Every agent-2 table on the subtree, in lexicographic order."""
        for u2 in range(len(self.m.actions2[t])):
            if t == self.m.horizon:
                yield {node: u2}
                continue
            kids = [list(self.tables(t + 1, c, S2)) for c, S2 in self.children(t, node, u2, S)]
            for combo in itertools.product(*kids):
                table = {node: u2}
                for part in combo:
                    table.update(part)
                yield table


def _best_response(m: TeamModel, g2: dict, y2_0: int):
    """Agent 1's optimal tables against a fixed agent-2 table, by exhaustive
    per-node minimization over agent 1's memory tree.

    Agent 1 has perfect recall and sees agent 2's memory, so its choices at
    distinct memory nodes enter the expected cost as independent summands of
    the subtrees below them; minimizing node by node is exact.
    Returns ``(unnormalized expected cost, {m1_node: u1})``.
    """
    T = m.horizon
    g1: dict = {}

    def value(t, y1s, u1s, y2s, u2s, alpha):
        u2 = g2[y2s, u2s]
        c = m.cost[t]
        best = None
        for u1 in range(len(m.actions1[t])):
            val = sum((a * c[x, u1, u2] for x, a in alpha.items()), Fraction(0))
            if t < T:
                f, h1, h2 = m.transition[t], m.obs_fn1[t + 1], m.obs_fn2[t + 1]
                nxt: dict = defaultdict(lambda: defaultdict(Fraction))
                for x, a in alpha.items():
                    for w, pw in m.w[t].support():
                        xn = f[x, u1, u2, w]
                        for v1, pv1 in m.v1[t + 1].support():
                            for v2, pv2 in m.v2[t + 1].support():
                                nxt[h1[xn, v1], h2[xn, v2]][xn] += a * pw * pv1 * pv2
                for (y1n, y2n) in sorted(nxt):
                    val += value(t + 1, y1s + (y1n,), u1s + (u1,), y2s + (y2n,), u2s + (u2,), nxt[y1n, y2n])
            if best is None or val < best[0]:
                best = (val, u1)
        g1[y1s, u1s, y2s, u2s] = best[1]
        return best[0]

    roots: dict = defaultdict(lambda: defaultdict(Fraction))
    for x, px in enumerate(m.x0):
        if px == 0:
            continue
        for v1, pv1 in m.v1[0].support():
            for v2, pv2 in m.v2[0].support():
                if m.obs_fn2[0][x, v2] == y2_0:
                    roots[m.obs_fn1[0][x, v1]][x] += px * pv1 * pv2
    total = sum((value(0, (y1,), (), (y2_0,), (), roots[y1]) for y1 in sorted(roots)), Fraction(0))
    return total, g1


def _tables_to_profile(m, g1_flat, g2_flat):
    s = StrategyProfile.empty(m.horizon)
    for node, u1 in g1_flat.items():
        s.g1[_node_time(node)][node] = u1
    for node, u2 in g2_flat.items():
        s.g2[_node_time(node)][node] = u2
    return s


def brute_force_optimal(m: TeamModel, max_profiles: int = DEFAULT_MAX_PROFILES,
                        method: str = "factorized") -> tuple[Fraction, StrategyProfile]:
    """Minimum expected cost over all strategy profiles, with a minimizing profile.

    ``method="factorized"`` enumerates every agent-2 table (separately under
    each first observation of agent 2, since those subtrees never interact)
    and pairs each with agent 1's exact best response.  ``method="exhaustive"``
    enumerates complete profiles on positive-probability nodes and evaluates
    each one; it is only practical for tiny models.
    """
    if method == "exhaustive":
        return _exhaustive_optimal(m, max_profiles)
    if method != "factorized":
        raise ValueError(f"unknown method {method!r}")
    tree = _Agent2Tree(m)
    roots = tree.roots()
    count = sum(tree.count(0, node, S) for node, S in roots)
    if count > max_profiles:
        raise ResourceBoundError("too many agent-2 strategies to enumerate", profiles=count, bound=max_profiles)
    total = Fraction(0)
    g1_all, g2_all = {}, {}
    for node, S in roots:
        best = None
        for table in tree.tables(0, node, S):
            val, g1 = _best_response(m, table, node[0][0])
            if best is None or val < best[0]:
                best = (val, table, g1)
        total += best[0]
        g2_all.update(best[1])
        g1_all.update(best[2])
    return total, _tables_to_profile(m, g1_all, g2_all)


def _exhaustive_optimal(m: TeamModel, max_profiles: int):
    T = m.horizon
    seen = [0]
    best: list = [None]

    def reachable(s: StrategyProfile, t):
        n1, n2 = set(), set()

        def visit(node, u1, u2):
            if node.t == t:
                n1.add(node.m1)
                n2.add(node.m2)

        def act(tt, node):
            if tt == t:
                return 0, 0
            return s.actions(tt, node)

        walk(m, act, until=t, visit=visit)
        return sorted(n1), sorted(n2)

    def extend(t, s: StrategyProfile):
        n1, n2 = reachable(s, t)
        a1, a2 = len(m.actions1[t]), len(m.actions2[t])
        for c2 in itertools.product(range(a2), repeat=len(n2)):
            for c1 in itertools.product(range(a1), repeat=len(n1)):
                g1 = list(s.g1)
                g2 = list(s.g2)
                g1[t] = dict(zip(n1, c1))
                g2[t] = dict(zip(n2, c2))
                nxt = StrategyProfile(tuple(g1), tuple(g2))
                if t < T:
                    extend(t + 1, nxt)
                    continue
                seen[0] += 1
                if seen[0] > max_profiles:
                    raise ResourceBoundError("too many strategy profiles", profiles=f">{max_profiles}",
                                             bound=max_profiles)
                val = evaluate_strategy(m, nxt)
                if best[0] is None or val < best[0][0]:
                    best[0] = (val, nxt)

    extend(0, StrategyProfile.empty(T))
    return best[0]


# --------------------------------------------------------------------------
# policies as strategy tables


def profile_from_policy(m: TeamModel, policy: SolvedPolicy) -> StrategyProfile:
    """Tabulate a solved policy over every positive-probability memory node."""
    ex = PolicyExecutor(policy, m)
    states: dict = {}
    s = StrategyProfile.empty(m.horizon)

    def act(t, node):
        y1s, u1s, y2s, u2s = node
        st = states.get(node)
        if st is None:
            if t == 0:
                st = ex.initial_state(y1s[0], y2s[0])
            else:
                parent = states[y1s[:-1], u1s[:-1], y2s[:-1], u2s[:-1]]
                st = ex.advance(parent, u1s[-1], u2s[-1], y1s[-1], y2s[-1])
            states[node] = st
        u1, u2 = ex.actions(st)
        prev = s.g2[t].setdefault((y2s, u2s), u2)
        if prev != u2:
            raise AssertionError(f"agent 2's action at {(y2s, u2s)} depends on agent 1's private data")
        s.g1[t][node] = u1
        return u1, u2

    walk(m, act)
    return s


@dataclass
class StructuredProfile:
    """A profile where agent 1 acts through prescriptions on its belief, plus the
    recursively filtered agent-2 beliefs and prescriptions it was built from."""

    profile: StrategyProfile
    belief2: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)


def structured_profile(m: TeamModel, choose: str | Callable = "first", seed: int = 0) -> StructuredProfile:
    """Build a profile by picking, at every agent-2 node, a prescription and an action.

    ``choose`` is ``"first"``, ``"last"``, ``"random"`` or a callable
    ``(t, n_options) -> index`` applied to the lexicographic list of
    ``(u2, prescription)`` pairs.
    """
    rng = random.Random(seed)
    if choose == "first":
        pick = lambda t, n: 0  # noqa: E731
    elif choose == "last":
        pick = lambda t, n: n - 1  # noqa: E731
    elif choose == "random":
        pick = lambda t, n: rng.randrange(n)  # noqa: E731
    else:
        pick = choose
    out = StructuredProfile(StrategyProfile.empty(m.horizon))
    decided: dict = {}

    def act(t, node):
        y1s, u1s, y2s, u2s = node
        key = (y2s, u2s)
        if key not in decided:
            if t == 0:
                pi2 = initial_belief2(m, y2s[0])
            else:
                parent = (y2s[:-1], u2s[:-1])
                pgamma, pu2 = decided[parent]
                pi2 = update_belief2(m, t - 1, out.belief2[parent], pgamma, pu2, NewInfo2(y2s[-1], u2s[-1]))
            options = [(u2, g) for u2 in range(len(m.actions2[t]))
                       for g in enumerate_prescriptions(pi2, m.actions1[t])]
            u2, gamma = options[pick(t, len(options))]
            out.belief2[key] = pi2
            out.gamma[key] = gamma
            decided[key] = (gamma, u2)
            out.profile.g2[t][key] = u2
        gamma, u2 = decided[key]
        u1 = gamma[reconstruct_belief1(out.belief2[key], PrivateHistory(y1s, u1s))]
        out.profile.g1[t][node] = u1
        return u1, u2

    walk(m, act)
    return out


@dataclass
class FilterReport:
    nodes1: int = 0
    nodes2: int = 0
    belief1_failures: list = field(default_factory=list)
    belief2_failures: list = field(default_factory=list)
    reconstruction_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.belief1_failures or self.belief2_failures or self.reconstruction_failures)


def check_filters(m: TeamModel, sp: StructuredProfile) -> FilterReport:
    """Compare recursive beliefs with brute-force conditionals at every memory node."""
    b1, b2 = conditional_tables(m, sp.profile)
    report = FilterReport(nodes1=len(b1), nodes2=len(b2))
    for key, truth in b2.items():
        if sp.belief2.get(key) != truth:
            report.belief2_failures.append(key)
    recursed: dict = {}
    for node in sorted(b1, key=lambda k: len(k[0])):
        y1s, u1s, y2s, u2s = node
        t = len(y1s) - 1
        if t == 0:
            pi1 = initial_belief1(m, y1s[0], y2s[0])
        else:
            parent = recursed[y1s[:-1], u1s[:-1], y2s[:-1], u2s[:-1]]
            pi1 = update_belief1(m, t - 1, parent, u1s[-1], u2s[-1], y1s[-1], y2s[-1])
        recursed[node] = pi1
        if pi1 != b1[node]:
            report.belief1_failures.append(node)
        if reconstruct_belief1(sp.belief2[y2s, u2s], PrivateHistory(y1s, u1s)) != pi1:
            report.reconstruction_failures.append(node)
    return report


# --------------------------------------------------------------------------
# random instances


class Dims(NamedTuple):
    states: int = 2
    actions1: int = 2
    actions2: int = 2
    obs1: int = 2
    obs2: int = 2
    w: int = 2
    v1: int = 2
    v2: int = 2
    horizon: int = 1

    def __str__(self):
        return "x".join(str(v) for v in self[:-1]) + f"/T={self.horizon}"


def _random_probs(rng: random.Random, n: int) -> tuple[Fraction, ...]:
    weights = [rng.randint(1, 4) for _ in range(n)]
    if n > 1 and rng.random() < 0.125:
        # occasional null atom so zero-probability pruning gets exercised
        weights[rng.randrange(n)] = 0
    total = sum(weights)
    return tuple(Fraction(wt, total) for wt in weights)


def generate_random_instance(seed: int, dims: Dims | tuple = Dims()) -> TeamModel:
    """A valid random model; identical for identical ``(seed, dims)``."""
    d = Dims(*dims)
    rng = random.Random(seed)
    T = d.horizon
    n = T + 1

    def space(prefix, k):
        return tuple(tuple(f"{prefix}{i}" for i in range(k)) for _ in range(n))

    def dist(prefix, k):
        return Distribution(tuple(f"{prefix}{i}" for i in range(k)), _random_probs(rng, k))

    w = tuple(dist("w", d.w) for _ in range(T))
    v1 = tuple(dist("v", d.v1) for _ in range(n))
    v2 = tuple(dist("n", d.v2) for _ in range(n))
    x0 = _random_probs(rng, d.states)
    transition = tuple(
        {k: rng.randrange(d.states) for k in itertools.product(range(d.states), range(d.actions1),
                                                                 range(d.actions2), range(d.w))}
        for _ in range(T))
    obs_fn1 = tuple({k: rng.randrange(d.obs1) for k in itertools.product(range(d.states), range(d.v1))}
                    for _ in range(n))
    obs_fn2 = tuple({k: rng.randrange(d.obs2) for k in itertools.product(range(d.states), range(d.v2))}
                    for _ in range(n))
    cost = tuple({k: Fraction(rng.randint(0, 9)) for k in itertools.product(range(d.states), range(d.actions1),
                                                                          range(d.actions2))}
                 for _ in range(n))
    m = TeamModel(T, space("x", d.states), space("a", d.actions1), space("b", d.actions2),
                  space("y", d.obs1), space("z", d.obs2), w, v1, v2, x0, transition, obs_fn1, obs_fn2, cost)
    assert not validate_model(m)
    return m


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass
class SimulationResult:
    mean: float
    std: float
    n: int
    trajectories: list | None = None

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.n)


def simulate(m: TeamModel, policy: SolvedPolicy | StrategyProfile, n_samples: int, seed: int = 0,
             log: bool = False) -> SimulationResult:
    """Sample ``n_samples`` independent trajectories and report the mean total cost.

    Uses ``numpy.random.default_rng(seed)``; floating point only here.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    profile = profile_from_policy(m, policy) if isinstance(policy, SolvedPolicy) else policy
    T = m.horizon
    rng = np.random.default_rng(seed)

    def cdf(probs):
        c = np.cumsum([float(p) for p in probs])
        c[-1] = 1.0
        return c

    def draw(probs, size):
        # index of the first cumulative bin above a uniform draw
        return np.searchsorted(cdf(probs), rng.random(size), side="right")

    x0 = draw(m.x0, n_samples)
    v1 = [draw(m.v1[t].probs, n_samples) for t in range(T + 1)]
    v2 = [draw(m.v2[t].probs, n_samples) for t in range(T + 1)]
    ws = [draw(m.w[t].probs, n_samples) for t in range(T)]
    cost_f = [{k: float(c) for k, c in m.cost[t].items()} for t in range(T + 1)]
    costs = np.empty(n_samples)
    trajectories = [] if log else None
    for i in range(n_samples):
        x = int(x0[i])
        y1s, u1s, y2s, u2s = (), (), (), ()
        total = 0.0
        path = []
        for t in range(T + 1):
            y1s += (m.obs_fn1[t][x, int(v1[t][i])],)
            y2s += (m.obs_fn2[t][x, int(v2[t][i])],)
            u1, u2 = profile.actions(t, (y1s, u1s, y2s, u2s))
            total += cost_f[t][x, u1, u2]
            if log:
                path.append((x, y1s[-1], y2s[-1], u1, u2))
            if t < T:
                x = m.transition[t][x, u1, u2, int(ws[t][i])]
                u1s += (u1,)
                u2s += (u2,)
        costs[i] = total
        if log:
            trajectories.append((total, path))
    std = float(costs.std(ddof=1)) if n_samples > 1 else 0.0
    return SimulationResult(float(costs.mean()), std, n_samples, trajectories)


# --------------------------------------------------------------------------
# battery


@dataclass(frozen=True)
class BatteryRow:
    seed: int
    dims: Dims
    oracle_value: Fraction
    dp_value: Fraction
    final_stage_ok: bool = True

    @property
    def match(self) -> bool:
        return self.oracle_value == self.dp_value

    def line(self) -> str:
        return (f"{self.seed}, {self.dims}, oracle_value {fmt_rational(self.oracle_value)}, "
                f"dp_value {fmt_rational(self.dp_value)}, match {'yes' if self.match else 'no'}")

    def as_dict(self) -> dict:
        return {"seed": self.seed, "dims": str(self.dims), "oracle_value": fmt_rational(self.oracle_value),
                "dp_value": fmt_rational(self.dp_value), "match": "yes" if self.match else "no"}


def run_battery(dims: Dims | tuple, count: int, seed: int = 1,
                max_profiles: int = DEFAULT_MAX_PROFILES, **solver_bounds) -> list[BatteryRow]:
    """Solve ``count`` random instances (seeds ``seed..seed+count-1``) both ways."""
    d = Dims(*dims)
    rows = []
    for s in range(seed, seed + count):
        m = generate_random_instance(s, d)
        oracle_value, _ = brute_force_optimal(m, max_profiles)
        solver = Solver(m, **solver_bounds)
        policy = solver.solve()
        final_ok = all(final_stage_equivalence_check(m, b) for b in solver.cache if b.time == m.horizon)
        rows.append(BatteryRow(s, d, oracle_value, policy.optimal_cost, final_ok))
    return rows
