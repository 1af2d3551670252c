"""
Monte Carlo tails and empirical rates
=====================================

Estimate P((chi2 - (m-1)) / (b sqrt(2m)) > r) with exact binomial intervals
and turn it into the empirical rate -log(p_hat) / b^2, whose reference
limit is r^2 / 2.
"""
from chisq_mdp import RegimeFamily, SimConfig, estimate_tail, rate_curve
from chisq_mdp.cli import schedule_point

family = RegimeFamily("uniform")
cfg = SimConfig(schedule_point(10**4, 0.4, 0.7), family, 200_000, seed=7,
                thresholds=(0.5, 1.0, 1.5))
for est in estimate_tail(cfg):
    print(f"r={est.r}: p_hat={est.p_hat:.3e} CI=[{est.ci_lo:.3e}, {est.ci_hi:.3e}] "
          f"rate={est.empirical_rate:.3f} ref={est.reference_rate}")

# rate curve along the schedule m = ceil(n^0.4), b = (log n)^0.7
points = [schedule_point(n, 0.4, 0.7) for n in (10**3, 10**4, 10**5)]
for pt in rate_curve(points, family, r=1.0, replicates=200_000, seed=7):
    print(f"n={pt.point.n:>6} m={pt.point.m:>3} b={pt.point.b:.3f} "
          f"rate={pt.empirical_rate:.3f} (reference {pt.reference_rate})")
