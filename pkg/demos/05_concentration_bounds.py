"""
Concentration bounds against simulation
=======================================

Hoeffding for bounded sums, and the Houdre-Reynaud tail for the degenerate
U-statistic built from the chi-square kernel.
"""
from chisq_mdp import hr_constants, hr_params_for_kernel, hr_threshold, validate
from chisq_mdp.bounds import validate_hoeffding, validate_hr_bound

for r in (0.05, 0.1, 0.2):
    chk = validate_hoeffding(100, r, 100_000, seed=1)
    print(f"Hoeffding n=100 r={r}: empirical {chk.empirical:.4f} <= bound {chk.bound:.4f}")

dist = validate([1 / 3] * 3)
consts = hr_constants(1.0)
print(f"eta={consts.eta:.4f} beta={consts.beta:.2f} gamma={consts.gamma:.2f}")

params = hr_params_for_kernel(dist, 10)
for u in (2.0, 4.0, 6.0):
    th = hr_threshold(params, consts, u)
    chk = validate_hr_bound(dist, 10, u, 100_000, seed=2)
    # the threshold is far out in the tail, so the empirical frequency is usually 0
    print(f"u={u}: Delta={th.delta:.1f}  empirical {chk.empirical:.2e} <= {chk.bound:.4f}")
