"""
Pointwise metrics: Apollonian, j and j'
=======================================

The Apollonian metric is a supremum over pairs of boundary points.  It is
computed from a finite boundary atlas, so every value comes with a bracket
[lower, upper] that contains the true value.
"""

# %%
# In the unit disk the Apollonian metric is the hyperbolic distance, so
# alpha(0, r) = log((1 + r) / (1 - r)).
import math

import numpy as np

from domain_metrics import apollonian, j_metric, make_domain, sphere_inversion

disk = make_domain({"kind": "ball", "n": 2})
atlas = disk.boundary_samples(10_000)
for r in (0.1, 0.5, 0.9):
    v = apollonian(disk, [0, 0], [r, 0], atlas)
    print(f"r={r}: alpha={v.value:.6f} in [{v.lower:.6f}, {v.upper:.6f}], "
          f"closed form {math.log((1 + r) / (1 - r)):.6f}")

# %%
# The half-plane atlas carries the point at infinity as well.
H = make_domain({"kind": "half_space", "n": 2, "normal": [0, 1], "offset": 0})
AH = H.boundary_samples(10_000)
print("half-plane alpha((0,1),(0,2)) =", apollonian(H, [0, 1], [0, 2], AH).value, "~ log 2 =", math.log(2))

# %%
# j is exact.  Apollonian sits between j and 2j (up to the bracket).
x, y = np.array([0.2, 0.1]), np.array([-0.6, 0.5])
a, j = apollonian(disk, x, y, atlas), j_metric(disk, x, y)
print(f"j = {j.value:.4f}, alpha = {a.value:.4f}, 2j = {2 * j.value:.4f}")

# %%
# Inversion in the circle of radius sqrt(2) about (-1, 0) maps the disk onto
# the right half-plane.  The Apollonian metric does not notice.
R = make_domain({"kind": "half_space", "n": 2, "normal": [1, 0], "offset": 0})
AR = R.boundary_samples(10_000)
c, rad = [-1, 0], math.sqrt(2)
b = apollonian(R, sphere_inversion(x, c, rad), sphere_inversion(y, c, rad), AR)
print(f"disk {a.value:.6f} vs image {b.value:.6f}")
