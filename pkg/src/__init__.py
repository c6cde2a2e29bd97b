"""
sparsebound - sparsity of integer programs in standard form

Exact linear algebra, residue groups, certified sparse solutions, an
exhaustive support oracle and density sweeps over right-hand-side boxes.
"""

__version__ = "1.0.0"
