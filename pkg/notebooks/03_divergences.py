# %% [markdown]
# # Planted versus null: chi-square, KL and TV
#
# ``chi2_exact`` sums over the overlap law; the Monte Carlo estimates use
# likelihood ratios under the null. Near ``lambda0`` the likelihood ratio
# has heavy tails, so the chi-square estimate is noisy and its standard
# error should not be trusted (``chi2_variance_finite`` flags this).

# %%
from aonlab import ModelParams, Seed, chi2_blowup_lower_bound, chi2_exact, mc_divergences, pinsker_chain

params = ModelParams(10, 2, 1.0, 3)
for lam in (params.lambda0, 1.2 * params.lambda0, 3.0):
    r = mc_divergences(params, lam, 20_000, Seed(1), threads=0)
    print(
        f"lam={lam:.3f} chi2 exact={r.chi2_exact:.4f} mc={r.chi2_mc:.4f}+-{r.chi2_se:.4f} "
        f"finite var={r.chi2_variance_finite} KL={r.kl_mc:.4f} TV={r.tv_mc:.4f}"
    )
    print("  Pinsker chain holds:", all(pinsker_chain(r)))

# %% [markdown]
# Past the critical sample size the chi-square divergence blows up.

# %%
base = ModelParams(16, 2, 2 / 3)
for n in range(1, 10):
    p = base.with_n(n)
    print(f"n={n} chi2={chi2_exact(p):12.4f}  lower bound={chi2_blowup_lower_bound(p):12.4f}")
