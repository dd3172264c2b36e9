"""Minimum damper over the (ks, ka) plane, analytic and simulated.

Run: python demos/05_sweep_map.py  (about 15 s with 4 workers)
"""
import numpy as np

from asymadmit.stiffness import AdmittanceParams
from asymadmit.sweep import analytic_map, simulated_map

base = AdmittanceParams.from_values(0.1, 0.0, 100.0, 100.0)


def show(grid, title):
    print(title)
    print("ks\\ka " + " ".join(f"{ka:5.0f}" for ka in grid.ka_values))
    for ks, row in zip(grid.ks_values, grid.d_min):
        print(f"{ks:5.0f} " + " ".join("    -" if np.isnan(v) else f"{v:5.2f}" for v in row))


# %% Sufficient damper per cell; zero where the stiffness eigenvalues are real.
show(analytic_map(base), "analytic bound")

# %% Smallest 0.1-step damper whose final 0.1 s mean kinetic energy is under 0.2 J.
sim = simulated_map(base, workers=4)
show(sim, "simulated")
feas = sim.feasible()
print("simulated never exceeds bound + 0.1:", bool(np.all(sim.d_min[feas] <= sim.d_min_analytic[feas] + 0.1 + 1e-12)))
