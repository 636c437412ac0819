"""
The three-site rotor
====================

A diffusion on three velocities that keeps both x+y+z and x^2+y^2+z^2.
It is a single rotation about the diagonal, so the state moves on a circle.
"""

import numpy as np

from nessdual.diffusion import run_trajectory
from nessdual.duality import RotationFrame, rotated_duality_function
from nessdual.model import ChainSpec, Family
from nessdual.streams import StepParams

s = run_trajectory(ChainSpec(Family.L3, 3), [1.0, 0.0, 0.0], StepParams(1e-2, 3), 100_000, 1000)
print("P range:", s.column("P").min(), s.column("P").max())
print("E range:", s.column("E").min(), s.column("E").max())

# duality functions live in the rotated frame
print(rotated_duality_function(RotationFrame.exact(0), 1, 0))
print(rotated_duality_function(RotationFrame.symbolic(), 1, 0))
