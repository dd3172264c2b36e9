"""Step responses either side of the threshold, and the effect of zeta.

Run: python demos/03_time_response.py
"""
import numpy as np

from asymadmit.simulator import Scenario, damping_from_zeta, detect_spiral, overshoot, simulate
from asymadmit.stiffness import AdmittanceParams, StiffnessMatrix

k = StiffnessMatrix(100.0, 100.0, 0.0, 10.0)
m = 0.1
sc = Scenario.step_force(0.0, 10.0, duration=5.0, dt=1e-3)

# %% 10 N pushing along y for 5 s.
for d in (0.30, 0.34):
    tr = simulate(AdmittanceParams(m, d, k), sc)
    amp = np.abs(tr.offset[:, 1])
    print(f"d={d}: {tr.status:11s} |y - y_eq| first second {amp[:1000].max():.3f} m, last second {amp[-1000:].max():.3f} m")

# %% Beyond the threshold the curl still drives a spiral, even at zeta > 1.
for zeta in (0.5, 1.0, 1.5):
    d = damping_from_zeta(k, m, zeta)
    tr = simulate(AdmittanceParams(m, d, k), sc)
    print(f"zeta={zeta}: d={d:.3f} winding {detect_spiral(tr):+.2f} turns, overshoot {overshoot(tr):.1e} m")

# %% A spiral-free asymmetric matrix is critically damped at zeta = 1.
k_free = StiffnessMatrix(140.0, 60.0, 0.0, 30.0)
tr = simulate(AdmittanceParams(m, damping_from_zeta(k_free, m, 1.0), k_free), sc)
print(f"spiral-free: winding {detect_spiral(tr):+.3f}, overshoot {overshoot(tr):.1e} m")
