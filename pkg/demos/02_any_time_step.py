"""
Bounds hold for any time step
=============================

With degenerate mobility the scheme keeps the phase field inside
``[-1, 1]`` whatever the time step.  Here one random field is advanced with
time steps from 1e-4 up to 100 and the extremes are printed after each
batch of steps.
"""

import numpy as np

from cahnfv import DegenerateMobility, DoubleWell, ModelParams, make_line_problem, step_line

rng = np.random.default_rng(0)
model = ModelParams(DoubleWell(), DegenerateMobility(), epsilon=1.0)
dx = 0.4  # 200 cells on [-40, 40]
start = rng.uniform(-0.5, 0.5, 200)

for dt in (1e-4, 1e-2, 1.0, 100.0):
    phi = start.copy()
    iters = 0
    for _ in range(20):
        sol = step_line(make_line_problem(phi, model, dt, dx))
        phi, iters = sol.phi_new, iters + sol.newton_iters
    print(f"dt={dt:<7g} max|phi|={np.abs(phi).max():.10f}  mass drift={phi.sum() - start.sum():+.1e}  newton iterations={iters}")
