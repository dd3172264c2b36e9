"""Eigenvalues, the damper threshold and root loci.

Run: python demos/02_eigen_thresholds.py
"""
import numpy as np

from asymadmit.eigen import (
    critical_damping,
    eigenvalues_closed_form,
    eigenvalues_oracle,
    min_damping_exact,
    min_damping_sufficient,
    multiset_deviation,
    root_locus,
    stability_report,
)
from asymadmit.stiffness import AdmittanceParams, StiffnessMatrix

k = StiffnessMatrix(100.0, 100.0, 0.0, 10.0)
m = 0.1

# %% Closed form against a numerical quartic solve.
for d in (0.30, 0.34):
    p = AdmittanceParams(m, d, k)
    cf, orc = eigenvalues_closed_form(p), eigenvalues_oracle(p)
    print(f"d={d}: max Re = {cf.max_real_part:+.4f}, deviation from quartic roots {multiset_deviation(cf, orc):.1e}")

# %% Threshold: the sufficient bound is exact when kx == ky and ks == 0.
print("sufficient d:", min_damping_sufficient(k, m))
print("exact d     :", min_damping_exact(k, m))
k2 = StiffnessMatrix(140.0, 60.0, 0.0, 45.0)
print("unequal diagonal -> sufficient", min_damping_sufficient(k2, m), "exact", min_damping_exact(k2, m))

# %% Critical damping only exists without a spiral.
print("spiral case :", critical_damping(k, m))
print("spiral-free :", critical_damping(StiffnessMatrix(140.0, 60.0, 0.0, 30.0), m))

# %% Same stiffness eigenvalues -> same root locus.
d = np.linspace(0.0, 40.0, 5)
a = root_locus(StiffnessMatrix(100, 100, 40, 0), 1.0, d)
b = root_locus(StiffnessMatrix(140, 60, 0, 0), 1.0, d)
for dm, row_a, row_b in zip(a.d_m, a.values, b.values):
    print(f"d_m={dm:5.1f}", np.round(row_a, 3), "max gap", np.abs(row_a - row_b).max())

# %% Everything in one report.
print(stability_report(AdmittanceParams(m, 0.34, k)).to_dict())
