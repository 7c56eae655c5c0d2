"""Prescriptions: maps from agent 1's belief to agent 1's action.

Agent 2 cannot see agent 1's belief, but it can commit to a rule that agent
1 then evaluates on its own belief.  Given agent 2's belief ``pi2``, the
only agent-1 beliefs that can occur are the slices ``reconstruct_belief1(pi2, l)``
over private histories ``l`` in the support, so a prescription is stored as
a finite table over exactly that domain.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .beliefs import Belief1, Belief2, reconstruct_belief1
from .errors import IncompletePrescriptionError, ResourceBoundError

__all__ = [
    "DEFAULT_MAX_PRESCRIPTIONS",
    "Prescription",
    "apply",
    "constant_prescription",
    "count_prescriptions",
    "enumerate_prescriptions",
    "prescription_domain",
]

DEFAULT_MAX_PRESCRIPTIONS = 1 << 16


def _belief_key(b: Belief1):
    return tuple((x, p.numerator, p.denominator) for x, p in b.probs)


@dataclass(frozen=True)
class Prescription:
    time: int
    domain: tuple[Belief1, ...]
    actions: tuple[int, ...]
    _table: dict = field(init=False, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if len(self.domain) != len(self.actions):
            raise ValueError("prescription domain and actions differ in length")
        object.__setattr__(self, "_table", dict(zip(self.domain, self.actions)))

    def __getitem__(self, pi1: Belief1) -> int:
        try:
            return self._table[pi1]
        except KeyError:
            raise IncompletePrescriptionError(f"prescription undefined on {pi1.encode()}") from None

    def __contains__(self, pi1) -> bool:
        return pi1 in self._table

    def items(self):
        return zip(self.domain, self.actions)

    def encode(self, m=None) -> str:
        """One ``belief -> action`` line per domain element, sorted."""
        t = self.time

        def act(u):
            return m.actions1[t][u] if m is not None else str(u)

        lines = sorted(f"{b.encode(m, t)} -> {act(u)}" for b, u in self.items())
        return "\n".join(lines)


def prescription_domain(pi2: Belief2) -> list[Belief1]:
    """Distinct agent-1 beliefs reachable from ``pi2``, in canonical order."""
    seen = {reconstruct_belief1(pi2, l) for l in pi2.histories()}
    return sorted(seen, key=_belief_key)


def count_prescriptions(pi2: Belief2, n_actions: int) -> int:
    return n_actions ** len(prescription_domain(pi2))


def enumerate_prescriptions(pi2: Belief2, actions1: Sequence | int,
                            max_count: int | None = DEFAULT_MAX_PRESCRIPTIONS) -> Iterator[Prescription]:
    """All prescriptions on ``prescription_domain(pi2)``, lexicographically.

    The first domain element is the most significant digit, so the first
    prescription maps everything to action 0 and the last maps everything to
    the last action.
    """
    a = actions1 if isinstance(actions1, int) else len(actions1)
    domain = tuple(prescription_domain(pi2))
    count = a ** len(domain)
    if max_count is not None and count > max_count:
        raise ResourceBoundError("too many prescriptions at one belief", time=pi2.time,
                                 domain_size=len(domain), actions=a, prescriptions=count,
                                 bound=max_count)
    for choice in itertools.product(range(a), repeat=len(domain)):
        yield Prescription(pi2.time, domain, choice)


def constant_prescription(pi2: Belief2, u1: int) -> Prescription:
    domain = tuple(prescription_domain(pi2))
    return Prescription(pi2.time, domain, (u1,) * len(domain))


def apply(gamma: Prescription, pi1: Belief1) -> int:
    """The action ``gamma`` prescribes for agent-1 belief ``pi1``."""
    return gamma[pi1]
