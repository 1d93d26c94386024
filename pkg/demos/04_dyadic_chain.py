"""
Dyadic chains along a path
==========================

Walking along a path from its end toward the point farthest from the
boundary, mark where the distance to the boundary first doubles.  The chain
diagnostics compare each link with its inner diameter.
"""

# %%
import numpy as np

from domain_metrics import Polyline, build_grid, make_domain, shortest_path
from domain_metrics.analysis import chain_diagnostics, dyadic_chain

H = make_domain({"kind": "half_space", "n": 2, "normal": [0, 1], "offset": 0})
ray = Polyline(np.c_[np.zeros(100), np.linspace(0.1, 12.8, 100)])
ch = dyadic_chain(H, ray)
print("m =", ch.m, "heights:", np.round(ch.x_chain[:, 1], 6))

# %%
G = build_grid(H, 0.5, ([-1, 0], [1, 14]))
rep = chain_diagnostics(H, G, H.boundary_samples(2000), ray)
print(f"b1 = {rep.b1:.3f}, b2 = {rep.b2:.3f}, b3 = {rep.b3:.3f}")

# %%
# Around the slit tip the geodesic first climbs away from the slit, then descends.
slit = make_domain({"kind": "slit_disk", "n": 2, "slit": [[0, 0], [1, 0]]})
GS = build_grid(slit, 0.01)
_, gamma = shortest_path(GS, slit, [0.5, 0.01], [0.5, -0.01], "quasihyperbolic")
rep = chain_diagnostics(slit, GS, slit.boundary_samples(4000), gamma)
print(f"m = {rep.chain.m}, s = {rep.chain.s}, b1 = {rep.b1:.3f}, b2 = {rep.b2:.3f}, b3 = {rep.b3:.3f}")
