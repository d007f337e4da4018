# python3
"""CHSH values and correlator scans for the whole zoo.

Since every model reproduces E(a,b) = -a.b, every model saturates the
Tsirelson bound 2*sqrt(2) at the optimal coplanar settings (Clauser,
Horne, Shimony, Holt 1969). This is the point of the zoo: violating a
Bell inequality picks out *which* classical assumption a model drops,
not whether it is "classical" in the loose sense.

The scan at the end sweeps the angle between a and b in one plane and
compares the estimated correlator with -cos(theta).
"""

import numpy as np

from singletzoo.geometry import coplanar
from singletzoo.models import estimate_joint
from singletzoo.quantum import CHSH_QUANTUM_BOUND, chsh_optimal_settings
from singletzoo.zoo import ZOO_NAMES, make_model

N = 200000
a, a2, b, b2 = chsh_optimal_settings()

print(f"CHSH S = E(a,b) - E(a,b') + E(a',b) + E(a',b') at N = {N} per term")
print(f"quantum bound 2*sqrt(2) = {CHSH_QUANTUM_BOUND:.6f}")
print()
for name in ZOO_NAMES:
    model = make_model(name)
    s_val, var = 0.0, 0.0
    for x, y, sign in ((a, b, 1), (a, b2, -1), (a2, b, 1), (a2, b2, 1)):
        est = estimate_joint(model, x, y, N, seed=7).correlator()
        s_val += sign * est.mean
        var += est.stderr**2
    print(f"  {name:14s} S = {s_val:.4f} +- {np.sqrt(var):.4f}")
print()

# correlator versus separation angle for one protocol model
model = make_model("toner-bacon")
print("theta   E_est      E_exact")
for theta in range(0, 181, 30):
    bb = coplanar(float(theta))
    est = estimate_joint(model, coplanar(0.0), bb, 100000, seed=3).correlator()
    exact = -np.cos(np.radians(theta))
    print(f"{theta:5d}   {est.mean:+.4f}    {exact:+.4f}")
