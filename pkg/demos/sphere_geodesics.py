"""Great circles on the unit sphere, traced as harmonic curves.

With a constant time metric the harmonic curves of the round sphere are its
geodesics. We start on the equator heading east and on a tilted great circle,
then report how well the kinetic energy is conserved and how far the equator
run drifts off the equator.
"""

import math

import numpy as np

from jetflow import RK4, SodeProblem, canonical_semispray, energy, harmonic_rhs, integrate
from jetflow.metrics import SpatialMetric, TemporalMetric

sphere = SpatialMetric.from_expressions([["1", "0"], ["0", "sin(x1)^2"]], 2)
rhs = harmonic_rhs(canonical_semispray(TemporalMetric.constant(), sphere))

for label, x0, v0 in (("equator", [math.pi / 2, 0.0], [0.0, 1.0]),
                      ("tilted", [1.0, 0.0], [0.3, 1.2])):
    traj = integrate(SodeProblem(rhs, 0.0, x0, v0, math.pi / 2, RK4(dt=1e-3)))
    E = energy(sphere, traj)
    print(f"{label:8s} steps={traj.stats['steps']}  energy drift={np.max(np.abs(E - E[0])):.2e}"
          f"  colatitude range=[{traj.x[:, 0].min():.6f}, {traj.x[:, 0].max():.6f}]")
