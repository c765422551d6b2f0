# %% [markdown]
# # Detection tests
#
# The residual test thresholds the best-subset residual fraction. The
# linear test correlates ``Y`` with ``X 1`` and is sign-symmetric under the
# null. Type-I counts planted draws called null. At desk scale this is
# the residual test's weak side: the planted statistic hovers around
# ``1/(1 + k/sigma2)`` and the threshold leaves only a ``1/(1 - alpha/2)``
# margin, which a ratio of chi-squares with few degrees of freedom
# overshoots about half the time. The null side is already clean at n = 6.

# %%
import math

from aonlab import ModelParams, Rule, Seed, detection_risk_mc, detection_sample_condition, residual_threshold

base = ModelParams(24, 3, 0.03)
print("threshold", residual_threshold(base, 0.1))
for n in (math.ceil(base.nstar), math.ceil(2 * base.nstar), 12, 24):
    params = base.with_n(n)
    r = detection_risk_mc(params, Rule.RESIDUAL_RATIO, 0.1, 300, Seed(n), threads=0)
    print(f"n={n:2d} type1={r.type1:.3f} type2={r.type2:.3f} sum={r.sum:.3f}", detection_sample_condition(params, 0.1))

# %%
weak = ModelParams(16, 8, 1.0, 64)
r = detection_risk_mc(weak, Rule.LINEAR_CORR, 0.1, 1000, Seed(9), threads=0)
print(f"linear test: type1={r.type1:.3f} type2={r.type2:.3f} sum={r.sum:.3f}")
