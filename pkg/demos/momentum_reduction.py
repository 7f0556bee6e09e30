# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Momentum maps and reduction
#
# Rotations of each massive mode are symmetries of the second-order final
# system. Their momenta come from the invariant Lagrangian one-form.

# %%
from fractions import Fraction

from presym.models import get_model
from presym.momred import build_momentum, reduce, route_equivalence

s = get_model("capri-s")
mm = build_momentum(s.system, s.action)
for name, f in zip(mm.action.names, mm.hamiltonians):
    print(f"f_{name} =", f)
print("Poissonian verdict:", mm.poissonian.verdict)

# %% [markdown]
# A level set has codimension two. The isotropy orbits are 2-dimensional,
# which leaves a 4-dimensional symplectic quotient.

# %%
red = reduce(s.system, mm, [Fraction(-1), Fraction(1, 2)])
print(red.to_text())

# %% [markdown]
# The same quotient can be reached in three ways: by complete reduction of
# the level set, by removing the gauge directions first, or by passing
# through a coisotropic symplectic extension. At a base point the three
# routes agree.

# %%
print(route_equivalence(s.system, mm, [-1, Fraction(1, 2)]).to_text())

# %% [markdown]
# ## Time as a symmetry
#
# Writing an autonomous system on `R^4 x R` makes time translation a
# symmetry whose momentum is the energy. Reducing by it drops two
# dimensions of rank, but the level form keeps a kernel direction that no
# generator accounts for, so the quotient is not symplectic.

# %%
a = get_model("autonomous-r2")
mm = build_momentum(a.system, a.action)
print("f_time =", mm.hamiltonians[0])
print(reduce(a.system, mm, [1]).to_text())
