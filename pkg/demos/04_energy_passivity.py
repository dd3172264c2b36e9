"""Where the curl term injects energy.

Run: python demos/04_energy_passivity.py
"""
import numpy as np

from asymadmit.energy import passivity_violations
from asymadmit.simulator import Scenario, simulate
from asymadmit.stiffness import AdmittanceParams

p = AdmittanceParams.from_values(0.1, 0.34, 100.0, 100.0, 0.0, 10.0)

# %% The four terms add up to the supplied work (rk4 keeps the phase exact).
tr = simulate(p, Scenario.step_force(integrator="rk4"))
eb = tr.energy
print("max |balance residual| / peak storage:", np.abs(eb.balance_residual).max() / eb.storage.max())
print(f"at 5 s: kinetic {eb.kinetic[-1]:.4f} J, spring {eb.potential[-1]:.4f} J, "
      f"dissipated {eb.dissipated[-1]:.4f} J, curl work {eb.curl_work[-1]:+.4f} J")

# %% Stored energy occasionally rises faster than it is supplied, at low speed.
for v in passivity_violations(eb)[:6]:
    inside = (eb.t >= v.start) & (eb.t <= v.end)
    print(f"{v.start:.3f}-{v.end:.3f} s: gain {v.gain:.2e} J, min speed {eb.speed[inside].min():.3f} m/s")

# %% With no curl there is nothing to violate passivity.
sym = simulate(AdmittanceParams.from_values(0.1, 0.05, 100.0, 100.0, 0.0, 0.0), Scenario.step_force(integrator="rk4"))
print("symmetric stiffness violations:", passivity_violations(sym.energy))
