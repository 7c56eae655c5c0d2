import itertools
import json
from fractions import Fraction

import pytest

from nestedteam.beliefs import Belief1, Belief2, PrivateHistory, initial_belief2
from nestedteam.dp import (
    Solver,
    execute_policy,
    final_stage_equivalence_check,
    parse_policy,
    solve,
    value_final,
    value_final_inner,
    value_step,
)
from nestedteam.errors import InconsistentTrajectoryError, ResourceBoundError
from nestedteam.model import load_model, serialize_model
from nestedteam.oracle import Dims, brute_force_optimal, generate_random_instance, simulate

from conftest import make_model

F = Fraction
DESK_OPTIMUM = F(1442, 1125)


def desk_at_horizon_zero(desk):
    doc = json.loads(serialize_model(desk))
    doc["horizon"] = 0
    doc["w"], doc["transition"] = [], []
    for key in ("v1", "v2"):
        doc[key] = doc[key][:1]
    for key in ("obs_fn1", "obs_fn2", "cost"):
        doc[key] = [e for e in doc[key] if e["t"] == 0]
    return load_model(json.dumps(doc))


def chain_model():
    """Deterministic T=1: x' = x xor u1 xor u2 from x0 = 0, both agents see x."""
    c0 = {(0, 0, 0): 2, (0, 0, 1): 1, (0, 1, 0): 3, (0, 1, 1): 5}
    c1 = {(0, a, b): a + b + 4 for a in (0, 1) for b in (0, 1)} | {(1, a, b): 2 * a + 3 * b for a in (0, 1)
                                                                     for b in (0, 1)}
    return make_model(T=1, nx=2, na1=2, na2=2, ny1=2, ny2=2, x0=[1, 0],
                      f=lambda t, x, a, b, n: x ^ a ^ b,
                      c=lambda t, x, a, b: c0.get((x, a, b), 0) if t == 0 else c1[x, a, b])


class TestFinalInner:
    def test_constant_cost(self):
        m = make_model(nx=2, na1=3, c=lambda t, x, a, b: 7)
        assert value_final_inner(m, Belief1.point(1), 0) == (7, 0)

    def test_point_mass_table_min(self):
        costs = {0: 4, 1: 2, 2: 9}
        m = make_model(nx=2, na1=3, c=lambda t, x, a, b: costs[a] if x == 1 else 0)
        assert value_final_inner(m, Belief1.point(1), 0) == (2, 1)

    def test_desk_half_half(self, desk):
        # last-step cost 5*[worn, u1=0, u2=0] + u1 + 2*u2: u1=0 gives 5/2, u1=1 gives 1
        pi1 = Belief1.from_weights({0: 1, 1: 1})
        assert value_final_inner(desk, pi1, 0) == (1, 1)
        assert value_final_inner(desk, pi1, 1) == (2, 0)


class TestValueFinal:
    def test_single_agent2_action_is_plain_expectation(self):
        m = make_model(nx=2, na1=2, ny1=2, c=lambda t, x, a, b: 3 * x + a * (1 - 2 * x) + 1)
        pi2 = Belief2.from_weights(0, {(0, PrivateHistory((0,), ())): 1, (1, PrivateHistory((1,), ())): 3})
        value, u2, table = value_final(m, pi2)
        assert value == F(1, 4) * 1 + F(3, 4) * 3
        assert u2 == 0
        assert table == {Belief1.point(0): 0, Belief1.point(1): 1}

    def test_point_mass_is_centralized(self, desk):
        pi2 = Belief2.from_weights(1, {(1, PrivateHistory((0, 1), (0,))): 1})
        value, u2, table = value_final(desk, pi2)
        assert value == min(desk.cost[1][1, a, b] for a in (0, 1) for b in (0, 1)) == 1
        assert (table[Belief1.point(1)], u2) == (1, 0)

    def test_desk_horizon_zero_matches_exhaustive_oracle(self, desk):
        m0 = desk_at_horizon_zero(desk)
        exhaustive, _ = brute_force_optimal(m0, method="exhaustive")
        assert solve(m0).optimal_cost == exhaustive

    def test_wrong_time(self, desk):
        with pytest.raises(ValueError):
            value_final(desk, initial_belief2(desk, 0))


class TestValueStep:
    def test_zero_cost(self):
        m = generate_random_instance(3, Dims(horizon=2))
        doc = json.loads(serialize_model(m))
        for e in doc["cost"]:
            e["value"] = "0"
        zero = load_model(json.dumps(doc))
        solver = Solver(zero)
        assert solver.solve().optimal_cost == 0
        assert solver.cache and all(e.value == 0 for e in solver.cache.values())

    def test_deterministic_hand_enumeration(self):
        m = chain_model()
        best = min(m.cost[0][0, a, b] + m.cost[1][a ^ b, a2, b2]
                   for a, b, a2, b2 in itertools.product((0, 1), repeat=4))
        value, gamma, u2 = value_step(m, 0, initial_belief2(m, 0))
        assert value == best == 1
        assert solve(m).optimal_cost == best

    def test_desk_per_first_observation(self, desk):
        solver = Solver(desk)
        roots = solver.roots()
        total = sum(p * value_step(desk, 0, b, solver)[0] for _, p, b in roots)
        assert [y for y, _, _ in roots] == [0, 1]
        assert sum(p for _, p, _ in roots) == 1
        assert total == DESK_OPTIMUM
        assert value_step(desk, 0, roots[0][2], solver)[0] == F(682, 625)

    def test_rejects_last_step(self, desk):
        pi2 = Belief2.from_weights(1, {(0, PrivateHistory((0, 0), (0,))): 1})
        with pytest.raises(ValueError):
            value_step(desk, 1, pi2)


class TestSolve:
    def test_singleton(self):
        assert solve(make_model(c=lambda t, x, a, b: 3)).optimal_cost == 3

    def test_zero_cost(self):
        assert solve(make_model(T=1, nx=2, na1=2, na2=2, ny1=2)).optimal_cost == 0

    def test_desk_matches_oracle(self, desk):
        p = solve(desk)
        assert p.optimal_cost == DESK_OPTIMUM
        assert brute_force_optimal(desk)[0] == DESK_OPTIMUM

    def test_belief_bound(self, desk):
        with pytest.raises(ResourceBoundError) as err:
            Solver(desk, max_beliefs=3).solve()
        assert err.value.diagnostics["bound"] == 3

    def test_prescription_bound(self, desk):
        with pytest.raises(ResourceBoundError) as err:
            Solver(desk, max_prescriptions=2).solve()
        assert err.value.diagnostics["prescriptions"] == 4

    def test_memo_soundness(self):
        for seed in (1, 2, 3):
            m = generate_random_instance(seed, Dims(horizon=2))
            solver = Solver(m)
            solver.solve()
            for b, e in list(solver.cache.items())[::7]:
                assert Solver(m).value(b) == e.value

    def test_value_bounds(self):
        for seed in range(1, 8):
            m = generate_random_instance(seed, Dims(horizon=2))
            solver = Solver(m)
            solver.solve()
            for b, e in solver.cache.items():
                assert 0 <= e.value <= sum(m.max_cost(t) for t in range(b.time, m.horizon + 1))

    def test_determinism(self, desk):
        a = solve(desk).serialize(desk)
        b = solve(desk).serialize(desk)
        assert a == b
        m = generate_random_instance(4, Dims(horizon=2))
        assert solve(m).serialize(m) == solve(m).serialize(m)


class TestFinalStageCheck:
    def test_point_mass(self, desk):
        pi2 = Belief2.from_weights(1, {(0, PrivateHistory((1, 1), (1,))): 1})
        assert final_stage_equivalence_check(desk, pi2)

    def test_single_agent1_action(self):
        m = generate_random_instance(9, Dims(3, 1, 2, 2, 2, 2, 2, 2, 0))
        for _, _, b in Solver(m).roots():
            assert final_stage_equivalence_check(m, b)

    def test_every_desk_terminal_belief(self, desk):
        solver = Solver(desk)
        solver.solve()
        terminal = [b for b in solver.cache if b.time == desk.horizon]
        assert len(terminal) > 4
        assert all(final_stage_equivalence_check(desk, b) for b in terminal)


class TestPolicyDocument:
    def test_round_trip(self, desk):
        p = solve(desk)
        text = p.serialize(desk)
        again = parse_policy(text, desk)
        assert again.serialize(desk) == text
        assert again.optimal_cost == DESK_OPTIMUM
        assert again.decisions.keys() == p.decisions.keys()

    def test_header_fields(self, desk):
        lines = solve(desk).serialize(desk).splitlines()
        assert lines[0] == "nestedteam-policy 1"
        assert lines[1].startswith("model sha256:")
        assert lines[3] == "optimal-cost 1442/1125"
        assert lines[-1] == "end"

    def test_wrong_model_rejected(self, desk):
        text = solve(desk).serialize(desk)
        with pytest.raises(ValueError):
            parse_policy(text, chain_model())
        with pytest.raises(ValueError):
            parse_policy("garbage\n", desk)


class TestExecution:
    def test_deterministic_tree(self):
        m = chain_model()
        p = solve(m)
        step = execute_policy(p, m).start(0, 0)
        u1, u2 = step.act()
        x1 = u1 ^ u2
        step.observe(x1, x1)
        v1, v2 = step.act()
        assert m.cost[0][0, u1, u2] + m.cost[1][x1, v1, v2] == p.optimal_cost

    def test_centralized_pair_at_horizon_zero(self):
        costs = {(0, 0): 3, (0, 1): 2, (1, 0): 1, (1, 1): 4}
        m = make_model(nx=2, na1=2, na2=2, x0=[0, 1], c=lambda t, x, a, b: costs[a, b] if x == 1 else 0)
        assert execute_policy(solve(m), m).start(0, 0).act() == (1, 0)

    def test_replay_simulated_trajectories(self, desk):
        p = solve(desk)
        ex = execute_policy(p, desk)
        run = simulate(desk, p, 200, seed=5, log=True)
        for total, path in run.trajectories:
            x, y1, y2, _, _ = path[0]
            step = ex.start(y1, y2)
            replayed = 0
            for t, (x, y1, y2, u1, u2) in enumerate(path):
                if t:
                    state = step.observe(y1, y2)
                    assert sum(pr for _, pr in state.pi1.probs) == 1
                    assert sum(pr for _, pr in state.pi2.probs) == 1
                assert step.act() == (u1, u2)
                replayed += desk.cost[t][x, u1, u2]
            assert float(replayed) == total

    def test_impossible_observation(self):
        m = chain_model()
        ex = execute_policy(solve(m), m)
        with pytest.raises(InconsistentTrajectoryError):
            ex.start(0, 1)
        step = ex.start(0, 0)
        u1, u2 = step.act()
        with pytest.raises(InconsistentTrajectoryError):
            step.observe(1 ^ u1 ^ u2, 1 ^ u1 ^ u2)

    def test_observe_before_act(self, desk):
        step = execute_policy(solve(desk), desk).start(0, 0)
        with pytest.raises(RuntimeError):
            step.observe(0, 0)
