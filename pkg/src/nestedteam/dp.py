"""Backward dynamic program over agent 2's beliefs.

For ``t < T`` agent 2 chooses its own action together with a prescription
for agent 1, and the value is the expected stage cost plus the expected
value of the next belief.  At the last step no prescription is needed:
agent 1 already knows agent 2's action, so it simply minimizes its own
expected cost, and agent 2 minimizes the expectation of that minimum.

Values are computed lazily by recursion from the initial beliefs and
memoized on canonical beliefs, so only reachable beliefs are ever built.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .beliefs import (
    Belief1,
    Belief2,
    NewInfo2,
    PrivateHistory,
    history_marginal,
    initial_belief1,
    initial_belief2,
    reconstruct_belief1,
    reduced_cost1,
    reduced_cost2,
    successors,
    update_belief1,
    update_belief2,
)
from .errors import InconsistentTrajectoryError, NullEventError, ResourceBoundError
from .model import TeamModel, fingerprint, fmt_rational, observation_kernel
from .prescriptions import DEFAULT_MAX_PRESCRIPTIONS, Prescription, enumerate_prescriptions, prescription_domain

__all__ = [
    "DEFAULT_MAX_BELIEFS",
    "PolicyExecutor",
    "SolvedPolicy",
    "Solver",
    "Stepper",
    "ValueCacheEntry",
    "execute_policy",
    "final_stage_equivalence_check",
    "parse_policy",
    "solve",
    "value_final",
    "value_final_inner",
    "value_step",
]

DEFAULT_MAX_BELIEFS = 200_000
POLICY_FORMAT = "nestedteam-policy 1"


@dataclass(frozen=True)
class ValueCacheEntry:
    belief2: Belief2
    time: int
    value: Fraction
    argmin_u2: int
    argmin_gamma: Prescription | None = None
    inner: tuple[tuple[Belief1, int], ...] | None = None  # last step only: agent-1 action per belief

    def inner_table(self) -> dict[Belief1, int]:
        return dict(self.inner or ())


def value_final_inner(m: TeamModel, pi1: Belief1, u2: int) -> tuple[Fraction, int]:
    """Agent 1's last-step minimization once agent 2's action is known."""
    T = m.horizon
    best = None
    for u1 in range(len(m.actions1[T])):
        c = reduced_cost1(m, T, pi1, u1, u2)
        if best is None or c < best[0]:
            best = (c, u1)
    return best


def value_final(m: TeamModel, pi2: Belief2) -> tuple[Fraction, int, dict[Belief1, int]]:
    """Last-step value of agent 2's belief, its action and agent 1's response table."""
    T = m.horizon
    if pi2.time != T:
        raise ValueError(f"value_final needs a belief at t={T}, got t={pi2.time}")
    # group private histories by the agent-1 belief they induce
    weight_of: dict[Belief1, Fraction] = defaultdict(Fraction)
    for l, p in history_marginal(pi2).items():
        weight_of[reconstruct_belief1(pi2, l)] += p
    domain = prescription_domain(pi2)
    best = None
    for u2 in range(len(m.actions2[T])):
        total = Fraction(0)
        table = {}
        for pi1 in domain:
            v, u1 = value_final_inner(m, pi1, u2)
            total += weight_of[pi1] * v
            table[pi1] = u1
        if best is None or total < best[0]:
            best = (total, u2, table)
    return best


class Solver:
    """Memoized evaluation of the value functions for one model."""

    def __init__(self, m: TeamModel, max_beliefs: int = DEFAULT_MAX_BELIEFS,
                 max_prescriptions: int = DEFAULT_MAX_PRESCRIPTIONS):
        self.model = m
        self.max_beliefs = max_beliefs
        self.max_prescriptions = max_prescriptions
        self.cache: dict[Belief2, ValueCacheEntry] = {}

    def entry(self, pi2: Belief2) -> ValueCacheEntry:
        hit = self.cache.get(pi2)
        if hit is not None:
            return hit
        if len(self.cache) >= self.max_beliefs:
            raise ResourceBoundError("too many reachable beliefs", beliefs=len(self.cache),
                                     bound=self.max_beliefs, time=pi2.time)
        m = self.model
        if pi2.time == m.horizon:
            value, u2, table = value_final(m, pi2)
            inner = tuple(sorted(table.items(), key=lambda kv: [(x, p.numerator, p.denominator)
                                                                 for x, p in kv[0].probs]))
            e = ValueCacheEntry(pi2, pi2.time, value, u2, None, inner)
        else:
            value, gamma, u2 = self._step(pi2)
            e = ValueCacheEntry(pi2, pi2.time, value, u2, gamma)
        self.cache[pi2] = e
        return e

    def value(self, pi2: Belief2) -> Fraction:
        return self.entry(pi2).value

    def _step(self, pi2: Belief2):
        m = self.model
        t = pi2.time
        best = None
        for u2 in range(len(m.actions2[t])):
            for gamma in enumerate_prescriptions(pi2, m.actions1[t], self.max_prescriptions):
                total = reduced_cost2(m, t, pi2, gamma, u2)
                for _, prob, nxt in successors(m, t, pi2, gamma, u2):
                    total += prob * self.value(nxt)
                if best is None or total < best[0]:
                    best = (total, gamma, u2)
        return best

    def roots(self) -> list[tuple[int, Fraction, Belief2]]:
        """``(y2_0, P(y2_0), pi2_0)`` for every possible first observation of agent 2."""
        m = self.model
        k2 = observation_kernel(m, 2, 0)
        out = []
        for y2 in range(len(m.obs2[0])):
            p = sum((px * k2[x][y2] for x, px in enumerate(m.x0)), Fraction(0))
            if p > 0:
                out.append((y2, p, initial_belief2(m, y2)))
        return out

    def solve(self) -> "SolvedPolicy":
        m = self.model
        roots = self.roots()
        optimal = sum((p * self.value(b) for _, p, b in roots), Fraction(0))
        # keep only the beliefs the optimal policy can actually visit
        decisions: dict[Belief2, ValueCacheEntry] = {}
        frontier = [b for _, _, b in roots]
        while frontier:
            b = frontier.pop()
            if b in decisions:
                continue
            e = self.entry(b)
            decisions[b] = e
            if b.time < m.horizon:
                frontier.extend(nxt for _, _, nxt in successors(m, b.time, b, e.argmin_gamma, e.argmin_u2))
        return SolvedPolicy(
            model_fingerprint=fingerprint(m),
            horizon=m.horizon,
            optimal_cost=optimal,
            roots=tuple((y2, p, b) for y2, p, b in roots),
            decisions=decisions,
        )


def value_step(m: TeamModel, t: int, pi2: Belief2, cache: Solver | None = None):
    """``(value, gamma*, u2*)`` for a belief strictly before the last step."""
    if not 0 <= t < m.horizon or pi2.time != t:
        raise ValueError(f"value_step needs a belief at some t < {m.horizon}")
    solver = cache if cache is not None else Solver(m)
    e = solver.entry(pi2)
    return e.value, e.argmin_gamma, e.argmin_u2


def solve(m: TeamModel, max_beliefs: int = DEFAULT_MAX_BELIEFS,
          max_prescriptions: int = DEFAULT_MAX_PRESCRIPTIONS) -> "SolvedPolicy":
    return Solver(m, max_beliefs, max_prescriptions).solve()


def final_stage_equivalence_check(m: TeamModel, pi2: Belief2) -> bool:
    """Compare the two-sub-step last-stage value with a direct minimization over
    ``(prescription, u2)`` pairs, as at earlier steps."""
    T = m.horizon
    two_step = value_final(m, pi2)[0]
    direct = min(
        reduced_cost2(m, T, pi2, gamma, u2)
        for u2 in range(len(m.actions2[T]))
        for gamma in enumerate_prescriptions(pi2, m.actions1[T], None)
    )
    return two_step == direct


# --------------------------------------------------------------------------
# solved policy


def _belief_sort_key(b: Belief2):
    return (b.time, [(x, l.encoded(), p.numerator, p.denominator) for (x, l), p in b.probs])


def _b1_text(b: Belief1) -> str:
    return "{" + ",".join(f"{x}={fmt_rational(p)}" for x, p in b.probs) + "}"


@dataclass
class SolvedPolicy:
    model_fingerprint: str
    horizon: int
    optimal_cost: Fraction
    roots: tuple[tuple[int, Fraction, Belief2], ...]
    decisions: dict[Belief2, ValueCacheEntry]

    def decision(self, pi2: Belief2) -> ValueCacheEntry:
        try:
            return self.decisions[pi2]
        except KeyError:
            raise KeyError(f"belief {pi2.encode()} is not on the solved policy's graph") from None

    def final_inner(self) -> dict[tuple[Belief1, int], int]:
        """Agent 1's last-step action keyed by (its belief, agent 2's action)."""
        out = {}
        for e in self.decisions.values():
            for pi1, u1 in e.inner or ():
                out[pi1, e.argmin_u2] = u1
        return out

    def serialize(self, m: TeamModel) -> str:
        """Versioned text document; beliefs use index encodings, actions use labels."""
        lines = [
            POLICY_FORMAT,
            f"model {self.model_fingerprint}",
            f"horizon {self.horizon}",
            f"optimal-cost {fmt_rational(self.optimal_cost)}",
        ]
        for y2, p, b in self.roots:
            lines.append(f"root {y2} {fmt_rational(p)} {b.encode()}")
        for b in sorted(self.decisions, key=_belief_sort_key):
            e = self.decisions[b]
            t = b.time
            lines.append(f"node {t} {b.encode()}")
            lines.append(f"  value {fmt_rational(e.value)}")
            lines.append(f"  u2 {m.actions2[t][e.argmin_u2]}")
            if e.argmin_gamma is not None:
                for pi1, u1 in e.argmin_gamma.items():
                    lines.append(f"  gamma {_b1_text(pi1)} -> {m.actions1[t][u1]}")
            for pi1, u1 in e.inner or ():
                lines.append(f"  inner {_b1_text(pi1)} -> {m.actions1[t][u1]}")
        lines.append("end")
        return "\n".join(lines) + "\n"


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _parse_b1(text: str) -> Belief1:
    body = text.strip()[1:-1]
    atoms = []
    for part in body.split(","):
        x, p = part.split("=")
        atoms.append((int(x), _parse_fraction(p)))
    return Belief1(tuple(atoms))


def _parse_b2(time: int, text: str) -> Belief2:
    body = text.strip()[1:-1]
    atoms = []
    for part in body.split(";"):
        key, p = part.rsplit("=", 1)
        nums = [int(v) for v in key.strip("()").split(",")]
        x, enc = nums[0], nums[1:]
        l = PrivateHistory(tuple(enc[0::2]), tuple(enc[1::2]))
        atoms.append(((x, l), _parse_fraction(p)))
    return Belief2(time, tuple(atoms))


def parse_policy(text: str, m: TeamModel) -> SolvedPolicy:
    """Inverse of :meth:`SolvedPolicy.serialize`; checks the model fingerprint."""
    lines = text.splitlines()
    if not lines or lines[0] != POLICY_FORMAT:
        raise ValueError("not a policy document (bad header)")
    if len(lines) < 2 or lines[1] != f"model {fingerprint(m)}":
        raise ValueError("policy was solved for a different model")
    try:
        return _parse_policy_body(lines, m)
    except (KeyError, IndexError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed policy document: {exc}") from None


def _parse_policy_body(lines, m: TeamModel) -> SolvedPolicy:
    fields = {}
    roots = []
    nodes = []  # (belief, value, u2, gamma pairs, inner pairs)
    for line in lines[1:]:
        if line == "end":
            break
        head, _, rest = line.strip().partition(" ")
        if line.startswith("node "):
            t_text, enc = rest.split(" ", 1)
            nodes.append([_parse_b2(int(t_text), enc), None, None, [], []])
        elif line.startswith("  "):
            cur = nodes[-1]
            t = cur[0].time
            if head == "value":
                cur[1] = _parse_fraction(rest)
            elif head == "u2":
                cur[2] = m.index("actions2", t, rest)
            else:
                b1, label = rest.split(" -> ", 1)
                pair = (_parse_b1(b1), m.index("actions1", t, label))
                cur[3 if head == "gamma" else 4].append(pair)
        elif head == "root":
            y2, p, enc = rest.split(" ", 2)
            roots.append((int(y2), _parse_fraction(p), _parse_b2(0, enc)))
        else:
            fields[head] = rest
    decisions = {}
    for b, value, u2, gamma_pairs, inner_pairs in nodes:
        gamma = None
        if b.time < m.horizon:
            gamma = Prescription(b.time, tuple(p for p, _ in gamma_pairs), tuple(u for _, u in gamma_pairs))
        decisions[b] = ValueCacheEntry(b, b.time, value, u2, gamma, tuple(inner_pairs) if b.time == m.horizon else None)
    return SolvedPolicy(fields["model"], int(fields["horizon"]), _parse_fraction(fields["optimal-cost"]),
                        tuple(roots), decisions)


# --------------------------------------------------------------------------
# execution


@dataclass(frozen=True)
class ExecState:
    """Beliefs of both agents and agent 1's private history after observing at ``t``."""

    t: int
    pi1: Belief1
    pi2: Belief2
    history: PrivateHistory


class PolicyExecutor:
    """Turns a solved policy back into concrete actions along a trajectory.

    The state-passing methods are pure; :meth:`start` wraps them in a
    stateful :class:`Stepper` for one trajectory.
    """

    def __init__(self, policy: SolvedPolicy, m: TeamModel):
        if policy.model_fingerprint != fingerprint(m):
            raise ValueError("policy was solved for a different model")
        self.policy = policy
        self.model = m
        self._roots = {y2: b for y2, _, b in policy.roots}
        self._inner = policy.final_inner()

    def initial_state(self, y1_0: int, y2_0: int) -> ExecState:
        if y2_0 not in self._roots:
            raise InconsistentTrajectoryError(f"agent 2 observation {y2_0} has zero probability at t=0")
        try:
            pi1 = initial_belief1(self.model, y1_0, y2_0)
        except NullEventError:
            raise InconsistentTrajectoryError(
                f"observations ({y1_0}, {y2_0}) have zero probability at t=0") from None
        return ExecState(0, pi1, self._roots[y2_0], PrivateHistory((y1_0,), ()))

    def actions(self, s: ExecState) -> tuple[int, int]:
        """``(u1, u2)`` prescribed at state ``s``."""
        e = self.policy.decision(s.pi2)
        u2 = e.argmin_u2
        if s.t < self.model.horizon:
            return e.argmin_gamma[s.pi1], u2
        return self._inner[s.pi1, u2], u2

    def advance(self, s: ExecState, u1: int, u2: int, y1_next: int, y2_next: int) -> ExecState:
        m = self.model
        e = self.policy.decision(s.pi2)
        try:
            pi2 = update_belief2(m, s.t, s.pi2, e.argmin_gamma, u2, NewInfo2(y2_next, u2))
            pi1 = update_belief1(m, s.t, s.pi1, u1, u2, y1_next, y2_next)
        except NullEventError as exc:
            raise InconsistentTrajectoryError(str(exc)) from None
        return ExecState(s.t + 1, pi1, pi2, s.history.extend(u1, y1_next))

    def start(self, y1_0: int, y2_0: int) -> "Stepper":
        return Stepper(self, self.initial_state(y1_0, y2_0))


class Stepper:
    """One trajectory: alternate :meth:`act` and :meth:`observe`."""

    def __init__(self, executor: PolicyExecutor, state: ExecState):
        self.executor = executor
        self.state = state
        self._last = None

    def act(self) -> tuple[int, int]:
        self._last = self.executor.actions(self.state)
        return self._last

    def observe(self, y1_next: int, y2_next: int) -> ExecState:
        if self._last is None:
            raise RuntimeError("observe() called before act()")
        u1, u2 = self._last
        self.state = self.executor.advance(self.state, u1, u2, y1_next, y2_next)
        self._last = None
        return self.state


def execute_policy(p: SolvedPolicy, m: TeamModel) -> PolicyExecutor:
    return PolicyExecutor(p, m)

