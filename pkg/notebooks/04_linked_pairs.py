# %% [markdown]
# # Linked pairs
#
# Two steps are linked when an edge added by the first is removed by the
# second. Any long run contains many disjoint linked pairs, and a pair of
# type 0 or 1 has a combined improvement that is hard to make tiny.

# %%
from twoopt_lab import analysis as A
from twoopt_lab.engine import PivotRule, run
from twoopt_lab.heuristics import random_tour
from twoopt_lab.random_models import sample_phi_perturbed

inst = sample_phi_perturbed(150, 2, phi=4.0, seed=2)
tr = run(inst, random_tour(inst, 2), PivotRule.first())
rep = A.linked_pair_decomposition(tr)
print("steps", rep.t)
print("all pairs", rep.pairs_all, "type histogram", rep.histogram)
print("disjoint", rep.pairs_disjoint, ">=", rep.bound_disjoint)
print("disjoint type 0/1", rep.pairs_type01_disjoint, ">=", rep.bound_type01)

# %%
print("smallest single improvement", A.min_improvement(inst, A.Over.SINGLE, tr))
print("smallest type 0/1 pair", A.min_improvement(inst, A.Over.LINKED_PAIRS_01, tr))
