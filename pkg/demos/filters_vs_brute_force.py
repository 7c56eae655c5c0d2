"""
Recursive beliefs against direct conditioning
=============================================

The belief updates never look at the strategies.  Here we pick a few
strategy profiles on a random model, compute each memory node's belief the
slow way (sum the joint tree, renormalize) and compare.
"""

from nestedteam.oracle import Dims, check_filters, conditional_tables, generate_random_instance, structured_profile

m = generate_random_instance(seed=12, dims=Dims(horizon=2))

for choose in ("first", "last", "random"):
    sp = structured_profile(m, choose, seed=3)
    report = check_filters(m, sp)
    print(f"{choose:>6}: {report.nodes2} agent-2 nodes, {report.nodes1} agent-1 nodes, ok={report.ok}")

# one node up close
b1, b2 = conditional_tables(m, sp.profile)
node = max(b2, key=lambda k: len(k[0]))
print("\nagent 2 memory", node)
print("  brute force:", b2[node].encode(m))
print("  recursive:  ", sp.belief2[node].encode(m))
