"""
Estimating domain constants
===========================

Constants are suprema of ratios over a pair sample, using quasihyperbolic
geodesics as candidate arcs.  They are lower bounds on the best constants.
Values above 1e3 are flagged as having no finite constant at this resolution.
"""

# %%
from domain_metrics import build_grid, make_domain
from domain_metrics.analysis import (
    adversarial_pairs, default_grid, estimate_constants, evaluate_sample, make_sample,
    verify_inequalities,
)

slit = make_domain({"kind": "slit_disk", "n": 2, "slit": [[0, 0], [1, 0]]})
G = build_grid(slit, 0.02)
A = slit.boundary_samples(10_000)

# %%
# A small uniform sample: every inequality holds at every pair.
S = make_sample(slit, "uniform", 60, seed=42)
ev = evaluate_sample(slit, G, A, S)
rep = verify_inequalities(slit, G, A, S, ev)
print("failures:", rep.n_failures)
for name, check in rep.checks.items():
    print(f"  {name:<24} checked {check.checked:>3}  worst margin {check.worst_margin:.3g}")

# %%
# Straddling the slit: the inner constant stays small, the Euclidean one explodes.
adv = adversarial_pairs(slit)
rep = estimate_constants(slit, G, A, adv, inequalities=False)
for name in ("c", "c_uniform", "c1", "c2", "c3"):
    e = rep[name]
    print(f"  {name:<10} {e.estimate:10.3f}  {e.note or ''}")

# %%
# The tangent-disk cusp is not inner uniform.  The ratios grow as the pairs go
# deeper into the cusp; at depth 1e-3 the cigar ratios already pass 1e3, and
# depth 1e-4 takes the other two past it as well (about two minutes).
cusp = make_domain({"kind": "tangent_disk_cusp", "n": 2, "radius": 1, "inner_radius": 0.5,
                    "direction": [1, 0], "depth": 1e-3})
GC = default_grid(cusp, 0.02)
AC = cusp.boundary_samples(4000)
rep = estimate_constants(cusp, GC, AC, adversarial_pairs(cusp), inequalities=False)
for name in ("c", "c1", "c2", "c3"):
    e = rep[name]
    print(f"  {name:<4} {e.estimate:10.1f}  {e.note or ''}")
