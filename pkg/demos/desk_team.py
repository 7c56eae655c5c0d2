"""
Solving the DeskTeam maintenance problem
========================================

Two agents look after one machine that is either ``ok`` or ``worn``.  Each
gets a noisy reading of it every step.  Agent 1 also sees everything agent 2
sees, so agent 2 cannot read agent 1's mind but agent 1 can read agent 2's.
"""

import nestedteam
from nestedteam.dp import Solver, execute_policy
from nestedteam.model import fmt_rational
from nestedteam.oracle import simulate

m = nestedteam.desk_team()
print("states:", m.states[0], "horizon:", m.horizon)

# agent 1's reading is right 4 times in 5, agent 2's only 2 times in 3
print("agent 1 kernel:", nestedteam.observation_kernel(m, 1, 0))
print("agent 2 kernel:", nestedteam.observation_kernel(m, 2, 0))

# The solver works on agent 2's belief over (state, agent 1's private history).
solver = Solver(m)
policy = solver.solve()
print("optimal expected cost:", fmt_rational(policy.optimal_cost), "=", float(policy.optimal_cost))
print("beliefs evaluated:", len(solver.cache), "on the optimal path:", len(policy.decisions))

for y2, p, pi2 in policy.roots:
    e = policy.decision(pi2)
    print(f"\nagent 2 first sees {m.obs2[0][y2]!r} (prob {fmt_rational(p)})")
    print("  belief:", pi2.encode(m))
    print("  agent 2 plays", m.actions2[0][e.argmin_u2], "and tells agent 1:")
    print("   ", e.argmin_gamma.encode(m).replace("\n", "\n    "))

# Same number from the brute-force strategy search, no beliefs involved.
value, _ = nestedteam.brute_force_optimal(m)
print("\nbrute force:", fmt_rational(value), "match:", value == policy.optimal_cost)

# Walk one trajectory by hand.
step = execute_policy(policy, m).start(y1_0=1, y2_0=0)
print("\nat t=0 agent 1 believes", step.state.pi1.encode(m), "-> actions", step.act())
step.observe(1, 1)
print("at t=1 agent 1 believes", step.state.pi1.encode(m), "-> actions", step.act())

r = simulate(m, policy, 100_000, seed=7)
print(f"\nMonte Carlo: {r.mean:.4f} +- {r.stderr:.4f} over {r.n} runs")
