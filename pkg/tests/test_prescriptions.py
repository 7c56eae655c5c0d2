import itertools
from fractions import Fraction

import pytest

from nestedteam.beliefs import Belief1, Belief2, PrivateHistory, initial_belief2
from nestedteam.errors import IncompletePrescriptionError, ResourceBoundError
from nestedteam.prescriptions import (
    Prescription,
    apply,
    constant_prescription,
    count_prescriptions,
    enumerate_prescriptions,
    prescription_domain,
)

F = Fraction


def hist(*ys):
    return PrivateHistory(tuple(ys), ())


def belief_with_k_slices(k):
    """A belief whose k private histories induce k distinct agent-1 beliefs."""
    return Belief2.from_weights(0, {(0, hist(i)): F(i + 1) for i in range(k)} |
                                {(1, hist(i)): F(1) for i in range(k)})


class TestDomain:
    def test_point_mass(self):
        assert prescription_domain(Belief2.from_weights(0, {(1, hist(0)): 1})) == [Belief1.point(1)]

    def test_two_point_slices(self):
        pi2 = Belief2.from_weights(0, {(0, hist(0)): 1, (1, hist(1)): 1})
        assert prescription_domain(pi2) == [Belief1.point(0), Belief1.point(1)]

    def test_coinciding_slices_dedup(self):
        pi2 = Belief2.from_weights(0, {(x, hist(y)): 1 for x in (0, 1) for y in (0, 1)})
        assert prescription_domain(pi2) == [Belief1.from_weights({0: 1, 1: 1})]

    def test_canonical_order(self):
        domain = prescription_domain(belief_with_k_slices(3))
        assert [b[0] for b in domain] == [F(1, 2), F(2, 3), F(3, 4)]


class TestEnumeration:
    def test_k1_a2(self):
        assert len(list(enumerate_prescriptions(belief_with_k_slices(1), ["p", "q"]))) == 2

    def test_k2_a2_order(self):
        gammas = list(enumerate_prescriptions(belief_with_k_slices(2), 2))
        assert [g.actions for g in gammas] == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_k3_a3(self):
        pi2 = belief_with_k_slices(3)
        assert len(list(enumerate_prescriptions(pi2, 3))) == 27 == count_prescriptions(pi2, 3)

    @pytest.mark.parametrize("k,a", [(k, a) for k in range(1, 5) for a in range(1, 4) if k * a <= 12])
    def test_complete_function_space(self, k, a):
        pi2 = belief_with_k_slices(k)
        domain = prescription_domain(pi2)
        maps = [tuple(g[b] for b in domain) for g in enumerate_prescriptions(pi2, a)]
        assert len(maps) == a ** k == len(set(maps))
        assert set(maps) == set(itertools.product(range(a), repeat=k))
        assert maps == sorted(maps)

    def test_bound_guard(self):
        pi2 = belief_with_k_slices(4)
        with pytest.raises(ResourceBoundError) as err:
            list(enumerate_prescriptions(pi2, 3, max_count=80))
        assert err.value.diagnostics["prescriptions"] == 81
        assert err.value.diagnostics["domain_size"] == 4


class TestApply:
    def test_constant(self, desk):
        pi2 = initial_belief2(desk, 0)
        gamma = constant_prescription(pi2, 1)
        assert {apply(gamma, b) for b in prescription_domain(pi2)} == {1}

    def test_first_enumerated_is_first_action(self, desk):
        pi2 = initial_belief2(desk, 1)
        first = next(enumerate_prescriptions(pi2, desk.actions1[0]))
        assert all(apply(first, b) == 0 for b in prescription_domain(pi2))

    def test_outside_domain(self, desk):
        gamma = constant_prescription(initial_belief2(desk, 0), 0)
        with pytest.raises(IncompletePrescriptionError):
            apply(gamma, Belief1.point(0))
        assert Belief1.point(0) not in gamma

    def test_encoding(self, desk):
        pi2 = initial_belief2(desk, 0)
        gamma = Prescription(0, tuple(prescription_domain(pi2)), (0, 1))
        assert gamma.encode(desk) == "{ok=1/2,worn=1/2} -> 0\n{ok=16/17,worn=1/17} -> 1"

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            Prescription(0, (Belief1.point(0),), (0, 1))
