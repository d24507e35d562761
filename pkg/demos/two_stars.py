"""
Two linked stars
================

Two 10-node stars with their hubs joined.  The controller gets close in
moment space but cannot build both hubs from local moves, so the error
stalls slightly above zero.  We compare the eigenvalue distributions.
"""

from lapmoments import centralize, generate, moments_of, run_to_convergence
from lapmoments.oracle import cdf_sup_distance, eigenvalues, spectral_cdf

target_graph = generate("two_stars", 20)
target = centralize(moments_of(target_graph))

for seed in range(3):
    r = run_to_convergence(generate("random_connected", 20, seed=seed), target)
    gap = cdf_sup_distance(eigenvalues(target_graph), eigenvalues(r.final_graph))
    hubs = sorted(r.final_graph.degree_sequence(), reverse=True)[:3]
    print(f"seed {seed}: {len(r.actions)} actions, CME {r.final_cme:.4f}, CDF gap {gap:.2f}, top degrees {hubs}")

# the CDF pairs are what one would plot against each other
for lam, frac in spectral_cdf(eigenvalues(target_graph))[:5]:
    print(f"  target  lambda={lam:7.3f}  F={frac:.2f}")
