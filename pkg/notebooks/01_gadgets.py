# %% [markdown]
# # Exponential 2-Opt gadgets
#
# Each family is a chain of 4-point blocks. A block is either short (A B C D)
# or long (A C B D). The script resets every block many times, so the number
# of improving steps doubles with each extra gadget.

# %%
from twoopt_lab import gadgets as G
from twoopt_lab.geometry import INF

for g in range(1, 9):
    inst, start, script = G.build_euclidean_family(g)
    rep = G.verify_script(inst, start, script)
    print(f"euclidean g={g:2d} points={inst.n:3d} steps={rep.steps_checked:6d} "
          f"expected={script.expected_count:6d} min margin={rep.min_margin:.3g} ok={rep.ok}")

# %% [markdown]
# Manhattan and general L_p families use alternating propagation and reset
# gadgets; the count is 2^(n+4) - 22.

# %%
for p in (1, 3, 10, INF):
    for n in (1, 4, 8):
        inst, start, script = (G.build_manhattan_family(n) if p == 1
                               else G.build_lp_family(n, p))
        rep = G.verify_script(inst, start, script)
        print(f"p={p} n={n} steps={rep.steps_checked} ok={rep.ok}")

# %% [markdown]
# The improvement inequalities behind each step, evaluated straight from coordinates.

# %%
for m in G.inequality_margins("manhattan"):
    print(f"{m.name:10s} {m.value:.6f}")
