"""
Path metrics on a grid graph
============================

k (quasihyperbolic), lambda (inner length), alpha~ (inner Apollonian) and
rho (inner diameter) are infima over paths.  They are approximated by
shortest paths on a lattice graph of the domain.
"""

# %%
import math

from domain_metrics import build_grid, inner_diameter, make_domain, shortest_path
from domain_metrics.metrics import j_prime

slit = make_domain({"kind": "slit_disk", "n": 2, "slit": [[0, 0], [1, 0]]})
G = build_grid(slit, 0.01)
A = slit.boundary_samples(10_000)
print(G)

# %%
# Two points straddling the slit are close in the plane but far apart in D.
x, y = [0.5, 0.1], [0.5, -0.1]
lam, path = shortest_path(G, slit, x, y, "euclidean")
print(f"|x-y| = 0.2, lambda = {lam.value:.4f} (around the tip: {2 * math.sqrt(0.26):.4f})")
print("path vertices:", len(path))

# %%
k, kpath = shortest_path(G, slit, x, y, "quasihyperbolic")
at, _ = shortest_path(G, slit, x, y, "apollonian", A)
print(f"k = {k.value:.4f} (lower bound {k.lower:.4f}), alpha~ = {at.value:.4f}")

# %%
# rho is bracketed by a threshold bisection; j' uses it in place of |x-y|.
rho, witness = inner_diameter(slit, x, y, G)
print(f"rho in [{rho.lower:.4f}, {rho.upper:.4f}], sqrt(0.26) = {math.sqrt(0.26):.4f}")
print("j' =", j_prime(slit, x, y, rho))

# %%
# Paths can be written out as CSV for plotting elsewhere.
kpath.to_csv("slit_geodesic.csv")
print(open("slit_geodesic.csv").read().splitlines()[:3])
