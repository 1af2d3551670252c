"""
Alphabet regimes and growth conditions
======================================

Build each distribution family at one schedule point and see how far the
point sits from the growth conditions. Ratios well below 1 are good.
"""
from chisq_mdp import RegimeFamily, SchedulePoint, build_distribution, check_conditions

point = SchedulePoint(n=10**6, m=250, b=3.0)

families = [
    RegimeFamily("uniform"),
    RegimeFamily("zipf-light", alpha=0.5),
    RegimeFamily("harmonic"),
    RegimeFamily("zipf-heavy", alpha=2.0),
    RegimeFamily("perturbed-uniform", gamma=3.0),
    RegimeFamily("truncated-geometric", alpha=0.01),
]

for fam in families:
    dist = build_distribution(fam, point)
    rep = check_conditions(point, dist)
    # zipf-heavy puts tiny mass on the tail, which blows up n*m*p_min^2 / b^4
    print(f"{fam.label:32s} p_min={dist.p_min:.3e}  ", end="")
    print("  ".join(f"{k}={v:.3g}" for k, v in rep.as_dict().items()))
