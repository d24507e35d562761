"""
Small-world target
==================

Watts-Strogatz graph on 40 nodes: ring lattice with 3-hop reach, each edge
rewired with probability 1/40.  One run takes several seconds.
"""

from lapmoments import centralize, generate, moments_of, run_to_convergence
from lapmoments.moments import signed_root

sw = generate("small_world", 40, {"p": 1 / 40}, seed=0)
target = centralize(moments_of(sw))

r = run_to_convergence(generate("random_connected", 40, seed=0), target, max_actions=100)
print(f"{len(r.actions)} actions, final CME {r.final_cme:.4f}, edges {r.final_graph.num_edges} vs {sw.num_edges}")

# where the remaining error sits, term by term
final = centralize(moments_of(r.final_graph))
print("mean term", (final.mean - target.mean) ** 2)
for k, a, b in ((2, final.c2, target.c2), (3, final.c3, target.c3), (4, final.c4, target.c4)):
    print(f"c{k} term", (signed_root(a, k) - signed_root(b, k)) ** 2)
