# %% [markdown]
# # Overlap between two random supports
#
# The overlap of two independent uniform k-subsets of ``[p]`` is
# hypergeometric. Supports are enumerated in colexicographic order.

# %%
import numpy as np

from aonlab import colex_rank, colex_unrank, enumerate_supports, hyp_pmf_upper_bound, overlap_law

law = overlap_law(24, 3)
for s, prob in zip(law.support, law.pmf):
    bound = hyp_pmf_upper_bound(24, 3, s) if s else float("nan")
    print(f"s={s}  P={prob:.6f}  bound={bound:.6f}")
print("total", law.pmf.sum())

# %%
supports = list(enumerate_supports(6, 2))
print(len(supports), "supports of size 2 in [6]")
print([s.indices for s in supports[:6]])
print("rank of (1, 4):", colex_rank((1, 4)), "unrank back:", colex_unrank(colex_rank((1, 4)), 6, 2))

# %% [markdown]
# Empirical check of the law by brute force over all pairs.

# %%
from aonlab import overlap

counts = np.zeros(3)
for a in supports:
    for b in supports:
        counts[overlap(a, b)] += 1
print(counts / counts.sum(), overlap_law(6, 2).pmf)
