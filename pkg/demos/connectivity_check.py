"""
Which links can go?
===================

Every node certifies, with a max-consensus that never sends an edge's
entry across that edge, which of its links can be removed without
splitting the network.  Here it is on a ring with one chord.
"""

from lapmoments import generate, verify_deletions

g = generate("ring", 8).add_edge(0, 4)
safe = verify_deletions(g)
for node, edges in safe.items():
    print(node, sorted(edges))

# lock-step exchanges run for n - 1 steps; compare with brute force
brute = {(i, j) for i, j in ((max(e), min(e)) for e in g.edges()) if g.remove_edge(i, j).is_connected()}
assert set().union(*safe.values()) == brute
print("agrees with brute force:", sorted(brute))
