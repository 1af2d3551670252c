"""
Linear plus martingale decomposition
====================================

chi2 - (m-1) splits into an i.i.d. sum (1/n) sum T_k and a martingale part
sqrt(2m/n) sum Y_k. The identity is exact, so the residual is rounding noise.
"""
import numpy as np

from chisq_mdp import RegimeFamily, SchedulePoint, build_distribution, decompose
from chisq_mdp.sampling import AliasTable, stream

point = SchedulePoint(n=500, m=20, b=1.0)
dist = build_distribution(RegimeFamily("zipf-light", alpha=0.5), point)
path = AliasTable(dist.p).sample(stream(1), point.n)

dec = decompose(path, dist)
print("chi2 - (m-1)      :", dec.chi2_centered)
print("linear part       :", dec.linear_term)
print("martingale part   :", dec.quadratic_term)
print("residual          :", dec.residual)

# the martingale part dominates at this scale
print("sum of Y_k        :", np.sum(dec.Y))
print("largest |T_k|     :", np.abs(dec.T).max(), "<= 1/p_min - m =", 1 / dist.p_min - dist.m)
