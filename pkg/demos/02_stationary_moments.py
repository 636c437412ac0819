"""
Stationary moments from absorbing walkers
=========================================

The k-th moments of the reservoir-driven BMP chain are averages of
``T_left**a * T_right**b`` over where k dual walkers end up.
"""

from fractions import Fraction

import numpy as np

from nessdual.absorption import absorption_distribution, covariance_matrix, stationary_moment, temperature_profile
from nessdual.model import ChainSpec, DualConfig, Family

spec = ChainSpec(Family.BMP, 10, T_left=1.0, T_right=2.0, boundary="reservoirs")

# one walker: a linear profile
prof = temperature_profile(spec)
print(np.round(prof, 6))
print("max deviation from 1 + i/11:", np.abs(prof - (1 + np.arange(1, 11) / 11)).max())

# two walkers: where do they end up?
small = ChainSpec(Family.BMP, 4, T_left=2.0, T_right=1.0, boundary="reservoirs")
d = absorption_distribution(DualConfig.single(4, 1, 3), small, exact=True)
print(dict(d.p))

# the covariance this produces, exactly
cov = stationary_moment(DualConfig.single(4, 1, 3), small, exact=True) - stationary_moment(
    DualConfig.single(4, 1), small, exact=True
) * stationary_moment(DualConfig.single(4, 3), small, exact=True)
print("cov(1,3) =", cov, "closed form", Fraction(2 * 1 * 2, 7 * 25))

# every pair is positively correlated out of equilibrium
print(np.round(covariance_matrix(spec), 5))
