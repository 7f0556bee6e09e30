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
# # Model files and the command line
#
# A model can be written as plain text and loaded back. The grammar is in
# `docs/model-format.md`.

# %%
from presym.cli import main
from presym.modelfile import dumps, loads

text = """
name = osc
coordinates = x y
velocities = x:u, y:v
parameters = k
lagrangian = 1/2*(u^2 + v^2) - 1/2*k*(x^2 + y^2)
theta = lagrangian
generator rot = x: -y; y: x; u: -v; v: u
"""
model = loads(text).build()
print("omega =", model.system.omega)
print("E =", model.system.hamiltonian)
print(dumps(model))

# %% [markdown]
# Mistakes are reported with their line and column.

# %%
from presym.modelfile import ModelFileError

try:
    loads("coordinates = x y\nomega = dx^dy\nhamiltonian = x + * y").build()
except ModelFileError as exc:
    print(exc)

# %% [markdown]
# The `presym` command runs the same pipelines. `main` returns the exit code.

# %%
import pathlib
import tempfile

with tempfile.TemporaryDirectory() as tmp:
    path = pathlib.Path(tmp) / "osc.model"
    path.write_text(text)
    code = main(["verify", "--model", str(path)])
    print("exit code", code)
    main(["reduce", "--model", str(path), "--mu", "1"])

# %%
main(["stabilize", "--example", "capri", "--sode"])
