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
# # Stabilizing a degenerate Lagrangian system
#
# The three-mode gyroscopic model lives on the tangent bundle of R^6, with
# twelve coordinates. Its Lagrangian 2-form is degenerate, so the dynamics
# only exists on a submanifold, which the constraint algorithm finds.

# %%
from presym.models import get_model
from presym.presymp import kernel_distribution

model = get_model("capri")
system = model.system
print(system)
print("omega =", system.omega)
print("E =", system.hamiltonian)

# %% [markdown]
# The kernel is spanned by coordinate fields along the massless mode.

# %%
for Z in kernel_distribution(system):
    print(Z)

# %% [markdown]
# Without the second-order condition, one generation of constraints appears.
# The gauge parameters along `x1` and `y1` get fixed, while those along `u1`
# and `v1` stay free.

# %%
report = model.stabilized(sode=False)
print(report.to_text())

# %% [markdown]
# Requiring second-order solutions adds `u1 = v1 = 0`. Afterwards no free
# parameter is left and the final system is symplectic on R^8.

# %%
report = model.stabilized(sode=True)
print(report.to_text())
final = report.final_system(system)
print(final.chart.coords, "rank", final.rank)
print("Omega_S =", final.omega)

# %% [markdown]
# ## A constrained final set
#
# For the conformal particle the constraints are quadrics, so the final set
# is not a coordinate slice. Points on it come from a sampler that builds
# null vectors.

# %%
conformal = get_model("conformal")
rep = conformal.stabilized(sode=False)
for z in rep.final.constraints:
    print(z)
print("free parameters:", rep.free_parameters)
