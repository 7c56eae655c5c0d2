import itertools
import math
import random
from fractions import Fraction

import pytest

from nestedteam.beliefs import Belief1, PrivateHistory, initial_belief2, reconstruct_belief1
from nestedteam.dp import solve
from nestedteam.errors import MissingEntryError, NullEventError, ResourceBoundError
from nestedteam.model import validate_model
from nestedteam.oracle import (
    Dims,
    StrategyProfile,
    brute_force_belief1,
    brute_force_belief2,
    brute_force_optimal,
    check_filters,
    conditional_tables,
    evaluate_strategy,
    generate_random_instance,
    profile_from_policy,
    run_battery,
    simulate,
    structured_profile,
    walk,
)
from nestedteam.prescriptions import Prescription, prescription_domain

from conftest import make_model

F = Fraction


def constant_profile(m, u1=0, u2=0):
    s = StrategyProfile.empty(m.horizon)

    def act(t, node):
        s.g1[t][node] = u1
        s.g2[t][node[2], node[3]] = u2
        return u1, u2

    walk(m, act)
    return s


class TestEvaluate:
    def test_zero_cost(self):
        m = make_model(T=1, nx=2, na1=2, na2=2, ny1=2, w=(F(1, 2), F(1, 2)))
        for u1, u2 in itertools.product((0, 1), repeat=2):
            assert evaluate_strategy(m, constant_profile(m, u1, u2)) == 0

    def test_single_path(self):
        m = make_model(T=2, nx=3, ny1=3, x0=[0, 1, 0], f=lambda t, x, a, b, n: (x + 1) % 3,
                       c=lambda t, x, a, b: 10 * t + x)
        # states 1, 2, 0
        assert evaluate_strategy(m, constant_profile(m)) == 1 + 12 + 20

    def test_desk_all_zeros(self, desk):
        # no servicing: the cost is 5 whenever the unit is worn, 5*(1/3) + 5*(1/3 + 2/3 * 1/5)
        assert evaluate_strategy(desk, constant_profile(desk)) == 4

    def test_partial_profile(self, desk):
        s = constant_profile(desk)
        del s.g1[1][next(iter(s.g1[1]))]
        with pytest.raises(MissingEntryError):
            evaluate_strategy(desk, s)
        s = constant_profile(desk)
        s.g2[0].clear()
        with pytest.raises(MissingEntryError):
            evaluate_strategy(desk, s)


class TestBruteForceOptimal:
    def test_singleton_actions(self):
        m = generate_random_instance(5, Dims(2, 1, 1, 2, 2, 2, 2, 2, 1))
        value, s = brute_force_optimal(m)
        assert value == evaluate_strategy(m, constant_profile(m))
        assert value == evaluate_strategy(m, s)

    def test_perfect_observation_horizon_zero(self):
        cost = {(0, 0, 0): 4, (0, 0, 1): 1, (0, 1, 0): 3, (0, 1, 1): 2,
                (1, 0, 0): 2, (1, 0, 1): 6, (1, 1, 0): 5, (1, 1, 1): 7}
        m = make_model(nx=2, na1=2, na2=2, ny1=2, ny2=2, x0=[F(1, 3), F(2, 3)], c=lambda t, x, a, b: cost[x, a, b])
        centralized = F(1, 3) * 1 + F(2, 3) * 2
        assert brute_force_optimal(m)[0] == centralized
        assert brute_force_optimal(m, method="exhaustive")[0] == centralized

    def test_desk(self, desk):
        value, s = brute_force_optimal(desk)
        assert value == solve(desk).optimal_cost == F(1442, 1125)
        assert evaluate_strategy(desk, s) == value

    @pytest.mark.parametrize("seed", range(1, 6))
    def test_factorized_equals_exhaustive_horizon_zero(self, seed):
        m = generate_random_instance(seed, Dims(2, 2, 2, 2, 2, 2, 2, 2, 0))
        assert brute_force_optimal(m)[0] == brute_force_optimal(m, method="exhaustive")[0]

    @pytest.mark.parametrize("seed", [1, 2])
    def test_factorized_equals_exhaustive_blind_agent1(self, seed):
        m = generate_random_instance(seed, Dims(2, 2, 2, 1, 2, 2, 2, 2, 1))
        fact, s = brute_force_optimal(m)
        assert fact == brute_force_optimal(m, method="exhaustive")[0]
        assert evaluate_strategy(m, s) == fact

    def test_bound(self, desk):
        with pytest.raises(ResourceBoundError) as err:
            brute_force_optimal(desk, max_profiles=10)
        assert err.value.diagnostics["profiles"] > 10
        with pytest.raises(ResourceBoundError):
            brute_force_optimal(desk, max_profiles=10, method="exhaustive")

    def test_unknown_method(self, desk):
        with pytest.raises(ValueError):
            brute_force_optimal(desk, method="clever")


class TestConditionals:
    def test_perfect_observation(self):
        m = make_model(T=1, nx=2, ny1=2, ny2=2, w=(F(1, 2), F(1, 2)), f=lambda t, x, a, b, n: n)
        s = constant_profile(m)
        for x in (0, 1):
            assert brute_force_belief1(m, s, ((0, x), (0,), (0, x), (0,))) == Belief1.point(x)

    def test_time_zero_is_initial_belief(self, desk):
        s = constant_profile(desk)
        for y2 in (0, 1):
            assert brute_force_belief2(desk, s, ((y2,), ())) == initial_belief2(desk, y2)

    def test_null_node(self):
        m = make_model(nx=2, ny2=2, x0=[1, 0])
        with pytest.raises(NullEventError):
            brute_force_belief2(m, constant_profile(m), ((1,), ()))

    def test_tables_agree_with_single_queries(self, desk):
        s = structured_profile(desk, "random", seed=3).profile
        b1, b2 = conditional_tables(desk, s)
        for node in list(b1)[::3]:
            assert brute_force_belief1(desk, s, node) == b1[node]
        for node in b2:
            assert brute_force_belief2(desk, s, node) == b2[node]

    @pytest.mark.parametrize("choose", ["first", "last", "random"])
    def test_filters_on_desk(self, desk, choose):
        report = check_filters(desk, structured_profile(desk, choose, seed=11))
        assert report.ok
        assert report.nodes1 > report.nodes2 > 0


def test_prescription_round_trip():
    """A control law of agent 2's memory and agent 1's belief becomes prescriptions and back."""
    for seed in range(1, 6):
        m = generate_random_instance(seed, Dims(2, 3, 2, 2, 2, 2, 2, 2, 1))
        rng = random.Random(seed)
        law = {}

        def g1(m2, pi1):
            return law.setdefault((m2, pi1), rng.randrange(3))

        sp = structured_profile(m, lambda t, n: rng.randrange(n), seed=seed)
        for node, u1 in [(k, v) for g in sp.profile.g1 for k, v in g.items()]:
            y1s, u1s, y2s, u2s = node
            pi2 = sp.belief2[y2s, u2s]
            pi1 = reconstruct_belief1(pi2, PrivateHistory(y1s, u1s))
            assert sp.gamma[y2s, u2s][pi1] == u1
            domain = tuple(prescription_domain(pi2))
            gamma = Prescription(pi2.time, domain, tuple(g1((y2s, u2s), b) for b in domain))
            assert gamma[pi1] == g1((y2s, u2s), pi1)


class TestRandomInstances:
    def test_deterministic(self):
        assert generate_random_instance(7, Dims(horizon=2)) == generate_random_instance(7, Dims(horizon=2))
        assert generate_random_instance(7) != generate_random_instance(8)

    def test_singleton(self):
        m = generate_random_instance(3, Dims(1, 1, 1, 1, 1, 1, 1, 1, 0))
        assert m.states == (("x0",),)
        assert validate_model(m) == []

    def test_battery_is_valid(self):
        for seed in range(1, 51):
            assert validate_model(generate_random_instance(seed, Dims())) == []

    def test_dims_text(self):
        assert str(Dims()) == "2x2x2x2x2x2x2x2/T=1"


class TestSimulate:
    def test_deterministic_model(self):
        m = make_model(T=2, nx=3, ny1=3, x0=[0, 1, 0], f=lambda t, x, a, b, n: (x + 1) % 3,
                       c=lambda t, x, a, b: 10 * t + x)
        r = simulate(m, solve(m), 50, seed=2)
        assert r.std == 0
        assert r.mean == 33

    def test_single_sample(self, desk):
        r = simulate(desk, solve(desk), 1, seed=4, log=True)
        assert r.n == 1
        assert r.mean == r.trajectories[0][0]
        path_cost = sum(float(desk.cost[t][x, u1, u2]) for t, (x, _, _, u1, u2) in enumerate(r.trajectories[0][1]))
        assert r.mean == path_cost

    def test_reproducible(self, desk):
        p = solve(desk)
        assert simulate(desk, p, 500, seed=9) == simulate(desk, p, 500, seed=9)
        assert simulate(desk, p, 500, seed=9).mean != simulate(desk, p, 500, seed=10).mean

    def test_profile_input(self, desk):
        r = simulate(desk, constant_profile(desk), 20_000, seed=1)
        assert abs(r.mean - 4) < 4 * r.stderr

    def test_rejects_zero_samples(self, desk):
        with pytest.raises(ValueError):
            simulate(desk, solve(desk), 0)


def test_policy_profile_reproduces_optimum(desk):
    for m in (desk, generate_random_instance(2, Dims(horizon=2))):
        p = solve(m)
        assert evaluate_strategy(m, profile_from_policy(m, p)) == p.optimal_cost


def test_battery_rows():
    rows = run_battery(Dims(), 3, seed=1)
    assert [r.seed for r in rows] == [1, 2, 3]
    assert all(r.match and r.final_stage_ok for r in rows)
    assert rows[0].line().startswith("1, 2x2x2x2x2x2x2x2/T=1, oracle_value ")
    assert rows[0].line().endswith(", match yes")
    assert rows[0].as_dict()["match"] == "yes"


def test_singleton_battery():
    (row,) = run_battery(Dims(1, 1, 1, 1, 1, 1, 1, 1, 0), 1)
    assert row.match
    assert not math.isnan(float(row.dp_value))
