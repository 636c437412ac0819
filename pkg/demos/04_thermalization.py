"""
From BEP to KMP: the instantaneous thermalization limit
=======================================================

Run two-site BEP(m) long enough to forget its start and compare the energy
split with the Beta(m/2, m/2) redistribution step.
"""

import numpy as np
from scipy import stats

from nessdual.diffusion import run_ensemble
from nessdual.jumps import kmp_step
from nessdual.model import ChainSpec, EnergyConfig, Family
from nessdual.streams import StepParams, make_rng

for m in (1, 2, 4):
    runs = run_ensemble(ChainSpec(Family.BEP, 2, m), [1.0, 1.0], StepParams(5e-4, m), 500, 40_000, 40_000)
    u = np.array([r.states[-1, 0] / r.states[-1].sum() for r in runs])
    rng = make_rng(0, m)
    v = np.array([kmp_step(EnergyConfig(np.array([1.0, 1.0])), m, rng).z[0] / 2 for _ in range(500)])
    print(f"m={m}: KS p-value BEP vs redistribution {stats.ks_2samp(u, v).pvalue:.3f}")

# m = 2 is KMP: the split is uniform
rng = make_rng(1)
v = np.array([kmp_step(EnergyConfig(np.array([3.0, 1.0])), 2, rng).z[0] / 4 for _ in range(5000)])
print("KMP split vs uniform:", stats.kstest(v, "uniform").pvalue)
