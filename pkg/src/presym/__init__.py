"""Exact constraint analysis and symmetry reduction for presymplectic systems.

Modules, bottom up:

- :mod:`presym.symexpr`: rational polynomials and the expression parser
- :mod:`presym.cartan`: charts, differential forms, vector fields
- :mod:`presym.linred`: pointwise linear algebra of forms and their reduction
- :mod:`presym.presymp`: presymplectic systems, kernels, Hamiltonian fields
- :mod:`presym.constraints` and :mod:`presym.gotay`: constraint sets and stabilization
- :mod:`presym.momred`: momentum maps, level sets and reduced spaces
- :mod:`presym.models`, :mod:`presym.modelfile`, :mod:`presym.cli`: examples and plumbing
"""

__version__ = "0.1.0"
