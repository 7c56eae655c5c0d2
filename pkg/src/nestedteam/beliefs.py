"""Information states of the two agents and their exact filters.

Agent 1 tracks ``pi1``, a distribution over the current state given its full
memory.  Agent 2 tracks ``pi2``, a joint distribution over the current state
and agent 1's private history (agent 1's own observations and actions, which
agent 2 never sees).  Agent 1's belief is recoverable from agent 2's by
slicing on the private history, see :func:`reconstruct_belief1`.

Beliefs are immutable and canonical: exact fractions, zero atoms dropped,
support sorted by index.  Two beliefs are equal iff their canonical forms
are, so they can be used directly as memoization keys.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import IncompletePrescriptionError, InconsistentObservationError, NullEventError
from .model import TeamModel, fmt_rational, observation_kernel

__all__ = [
    "Belief1",
    "Belief2",
    "NewInfo2",
    "PrivateHistory",
    "history_marginal",
    "initial_belief1",
    "initial_belief2",
    "reconstruct_belief1",
    "reduced_cost1",
    "reduced_cost2",
    "successors",
    "update_belief1",
    "update_belief2",
    "z2_distribution",
]


class PrivateHistory(NamedTuple):
    """Agent 1's observations ``y1_0..y1_t`` and actions ``u1_0..u1_{t-1}``."""

    y1: tuple[int, ...]
    u1: tuple[int, ...]

    @property
    def time(self) -> int:
        return len(self.y1) - 1

    def encoded(self) -> tuple[int, ...]:
        """Interleaved ``(y0, u0, y1, u1, ..., yt)``; the canonical sort key."""
        out = []
        for i, y in enumerate(self.y1):
            out.append(y)
            if i < len(self.u1):
                out.append(self.u1[i])
        return tuple(out)

    def extend(self, u1: int, y1_next: int) -> "PrivateHistory":
        return PrivateHistory(self.y1 + (y1_next,), self.u1 + (u1,))

    def label(self, m: TeamModel) -> str:
        parts = []
        for t, y in enumerate(self.y1):
            parts.append(m.obs1[t][y])
            if t < len(self.u1):
                parts.append(m.actions1[t][self.u1[t]])
        return ",".join(parts)


class NewInfo2(NamedTuple):
    """What agent 2 learns between ``t`` and ``t+1``: its next observation and its own action."""

    y2: int
    u2: int


def _normalize(weights: dict, what: str):
    total = sum(weights.values(), Fraction(0))
    if total == 0:
        raise NullEventError(f"cannot condition {what} on a zero-probability event")
    return {k: p / total for k, p in weights.items() if p != 0}


@dataclass(frozen=True)
class Belief1:
    """Distribution over states; ``probs`` is the sorted positive support."""

    probs: tuple[tuple[int, Fraction], ...]

    @classmethod
    def from_weights(cls, weights: dict) -> "Belief1":
        """Normalize unnormalized state weights into a canonical belief."""
        norm = _normalize(weights, "state belief")
        return cls(tuple(sorted(norm.items())))

    @classmethod
    def point(cls, x: int) -> "Belief1":
        return cls(((x, Fraction(1)),))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.probs)

    def __getitem__(self, x: int) -> Fraction:
        return self.as_dict().get(x, Fraction(0))

    def encode(self, m: TeamModel | None = None, t: int = 0) -> str:
        name = (lambda x: m.states[t][x]) if m is not None else str
        return "{" + ",".join(f"{name(x)}={fmt_rational(p)}" for x, p in self.probs) + "}"


@dataclass(frozen=True)
class Belief2:
    """Distribution over (state, private history) pairs at time ``time``."""

    time: int
    probs: tuple[tuple[tuple[int, PrivateHistory], Fraction], ...]

    @classmethod
    def from_weights(cls, time: int, weights: dict) -> "Belief2":
        norm = _normalize(weights, "joint belief")
        for (_, l) in norm:
            if l.time != time:
                raise ValueError(f"private history of length {len(l.y1)} in a belief at t={time}")
        atoms = sorted(norm.items(), key=lambda kv: (kv[0][0], kv[0][1].encoded()))
        return cls(time, tuple(atoms))

    def as_dict(self) -> dict[tuple[int, PrivateHistory], Fraction]:
        return dict(self.probs)

    def histories(self) -> list[PrivateHistory]:
        """Distinct private histories in the support, in canonical order."""
        seen = dict.fromkeys(l for (_, l), _ in sorted(self.probs, key=lambda kv: kv[0][1].encoded()))
        return list(seen)

    def encode(self, m: TeamModel | None = None) -> str:
        def one(x, l):
            if m is None:
                return f"({x},{','.join(map(str, l.encoded()))})"
            return f"({m.states[self.time][x]},{l.label(m)})"
        return "{" + ";".join(f"{one(x, l)}={fmt_rational(p)}" for (x, l), p in self.probs) + "}"


# --------------------------------------------------------------------------
# construction


def initial_belief1(m: TeamModel, y1_0: int, y2_0: int) -> Belief1:
    """``P(x_0 | y1_0, y2_0)``."""
    k1 = observation_kernel(m, 1, 0)
    k2 = observation_kernel(m, 2, 0)
    weights = {x: p * k1[x][y1_0] * k2[x][y2_0] for x, p in enumerate(m.x0)}
    return Belief1.from_weights(weights)


def initial_belief2(m: TeamModel, y2_0: int) -> Belief2:
    """``P(x_0, y1_0 | y2_0)``: agent 2's belief before any action."""
    k1 = observation_kernel(m, 1, 0)
    k2 = observation_kernel(m, 2, 0)
    weights = {}
    for x, p in enumerate(m.x0):
        for y1, q in enumerate(k1[x]):
            weights[x, PrivateHistory((y1,), ())] = p * q * k2[x][y2_0]
    return Belief2.from_weights(0, weights)


def history_marginal(pi2: Belief2) -> dict[PrivateHistory, Fraction]:
    out: dict[PrivateHistory, Fraction] = defaultdict(Fraction)
    for (_, l), p in pi2.probs:
        out[l] += p
    return dict(out)


def reconstruct_belief1(pi2: Belief2, l: PrivateHistory) -> Belief1:
    """Agent 1's belief implied by agent 2's belief and agent 1's private history."""
    weights = {x: p for (x, h), p in pi2.probs if h == l}
    if not weights:
        raise NullEventError(f"private history {l.encoded()} has zero probability under pi2")
    return Belief1.from_weights(weights)


# --------------------------------------------------------------------------
# filters


def update_belief1(m: TeamModel, t: int, pi1: Belief1, u1: int, u2: int,
                   y1_next: int, y2_next: int) -> Belief1:
    """One step of agent 1's filter: predict through ``f_t`` then correct on both observations."""
    if not 0 <= t < m.horizon:
        raise ValueError(f"update_belief1 needs 0 <= t < {m.horizon}, got {t}")
    f = m.transition[t]
    predicted: dict[int, Fraction] = defaultdict(Fraction)
    for x, p in pi1.probs:
        for w, pw in m.w[t].items():
            predicted[f[x, u1, u2, w]] += p * pw
    k1 = observation_kernel(m, 1, t + 1)
    k2 = observation_kernel(m, 2, t + 1)
    weights = {x: p * k1[x][y1_next] * k2[x][y2_next] for x, p in predicted.items()}
    try:
        return Belief1.from_weights(weights)
    except NullEventError:
        raise InconsistentObservationError(
            f"observations ({y1_next}, {y2_next}) have zero probability at t={t + 1}") from None


def _prescribed_actions(pi2: Belief2, gamma) -> dict[PrivateHistory, int]:
    """Agent 1's action for each private history in the support.

    ``gamma`` is anything indexable by :class:`Belief1` (a
    :class:`~nestedteam.prescriptions.Prescription` or a plain dict).
    """
    out = {}
    for l in pi2.histories():
        pi1 = reconstruct_belief1(pi2, l)
        try:
            out[l] = gamma[pi1]
        except KeyError:
            raise IncompletePrescriptionError(f"prescription undefined on {pi1.encode()}") from None
    return out


def _successor_weights(m: TeamModel, t: int, pi2: Belief2, gamma, u2: int, y2_filter=None):
    """Unnormalized next-step joint weights, grouped by agent 2's next observation.

    Sums over every primitive realization ``(w, v1, v2)``.  With ``y2_filter``
    set, only that observation's branch is accumulated.
    """
    f = m.transition[t]
    h1 = m.obs_fn1[t + 1]
    h2 = m.obs_fn2[t + 1]
    w_sup = m.w[t].support()
    v1_sup = m.v1[t + 1].support()
    v2_sup = m.v2[t + 1].support()
    actions = _prescribed_actions(pi2, gamma)
    out: dict[int, dict] = defaultdict(lambda: defaultdict(Fraction))
    for (x, l), p in pi2.probs:
        u1 = actions[l]
        for w, pw in w_sup:
            xn = f[x, u1, u2, w]
            for v2, pv2 in v2_sup:
                y2 = h2[xn, v2]
                if y2_filter is not None and y2 != y2_filter:
                    continue
                bucket = out[y2]
                base = p * pw * pv2
                for v1, pv1 in v1_sup:
                    bucket[xn, l.extend(u1, h1[xn, v1])] += base * pv1
    return out


def update_belief2(m: TeamModel, t: int, pi2: Belief2, gamma, u2: int, z2: NewInfo2) -> Belief2:
    """Agent 2's filter: push ``pi2`` through the dynamics under prescription ``gamma`` and
    action ``u2``, then condition on the new observation ``z2.y2``."""
    if not 0 <= t < m.horizon:
        raise ValueError(f"update_belief2 needs 0 <= t < {m.horizon}, got {t}")
    if pi2.time != t:
        raise ValueError(f"belief is at t={pi2.time}, update requested at t={t}")
    if z2.u2 != u2:
        raise ValueError("new information must carry the action agent 2 just took")
    weights = _successor_weights(m, t, pi2, gamma, u2, y2_filter=z2.y2).get(z2.y2, {})
    try:
        return Belief2.from_weights(t + 1, weights)
    except NullEventError:
        raise InconsistentObservationError(
            f"agent 2 observation {z2.y2} has zero probability at t={t + 1}") from None


def successors(m: TeamModel, t: int, pi2: Belief2, gamma, u2: int) -> list[tuple[int, Fraction, Belief2]]:
    """Every positive-probability next observation of agent 2 with its probability
    and the updated belief, from a single pass over the primitives.

    Equivalent to pairing :func:`z2_distribution` with :func:`update_belief2`.
    """
    out = []
    for y2, weights in sorted(_successor_weights(m, t, pi2, gamma, u2).items()):
        mass = sum(weights.values(), Fraction(0))
        if mass != 0:
            out.append((y2, mass, Belief2.from_weights(t + 1, weights)))
    return out


def z2_distribution(m: TeamModel, t: int, pi2: Belief2, gamma, u2: int) -> dict[int, Fraction]:
    """Probability of each next agent-2 observation given ``(pi2, gamma, u2)``.

    Only observations with positive probability appear.
    """
    if not 0 <= t < m.horizon:
        raise ValueError(f"z2_distribution needs 0 <= t < {m.horizon}, got {t}")
    f = m.transition[t]
    h2 = m.obs_fn2[t + 1]
    actions = _prescribed_actions(pi2, gamma)
    out: dict[int, Fraction] = defaultdict(Fraction)
    for (x, l), p in pi2.probs:
        u1 = actions[l]
        for w, pw in m.w[t].support():
            xn = f[x, u1, u2, w]
            for v2, pv2 in m.v2[t + 1].support():
                out[h2[xn, v2]] += p * pw * pv2
    return {y: p for y, p in sorted(out.items()) if p != 0}


# --------------------------------------------------------------------------
# costs


def reduced_cost1(m: TeamModel, t: int, pi1: Belief1, u1: int, u2: int) -> Fraction:
    """Expected stage cost under agent 1's belief."""
    c = m.cost[t]
    return sum((p * c[x, u1, u2] for x, p in pi1.probs), Fraction(0))


def reduced_cost2(m: TeamModel, t: int, pi2: Belief2, gamma, u2: int) -> Fraction:
    """Expected stage cost under agent 2's belief when agent 1 follows ``gamma``."""
    c = m.cost[t]
    actions = _prescribed_actions(pi2, gamma)
    return sum((p * c[x, actions[l], u2] for (x, l), p in pi2.probs), Fraction(0))

