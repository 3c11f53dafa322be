"""Random 2-SAT with inhomogeneous clause kernels.

Block kernels on signed types, their implication digraphons and spectra,
seeded samplers for the random formula models, a certified 2-SAT solver,
witness structures and a Monte Carlo harness.
"""

from .components import Decomposition, decompose, strongly_connected
from .kernel import (BlockDigraphon, BlockKernel, BlockSet, InvalidKernelError, TypeSpace,
                     implication_digraphon, l1_norm, power_law_kernel, restrict, scale, validate_kernel)
from .sampler import Digraph, Formula, Stream, TypeAssignment, sample, sample_formula
from .solver import Verdict, implication_digraph, is_satisfiable, solve_bruteforce, solve_scc
from .spectra import kernel_power, rho_star, spectral_radius

__version__ = "0.1.0"

__all__ = [
    "BlockDigraphon", "BlockKernel", "BlockSet", "Decomposition", "Digraph", "Formula",
    "InvalidKernelError", "Stream", "TypeAssignment", "TypeSpace", "Verdict", "decompose",
    "implication_digraph", "implication_digraphon", "is_satisfiable", "kernel_power", "l1_norm",
    "power_law_kernel", "restrict", "rho_star", "sample", "sample_formula", "scale",
    "solve_bruteforce", "solve_scc", "spectral_radius", "strongly_connected", "validate_kernel",
]
