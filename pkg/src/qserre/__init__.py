"""Exact verification of quantum Serre-type identities built from solutions
of a functional-equation exchange system."""

from .scalarq import QScalar, qint, qfact, qbinom
from .mlaurent import MLaurent, Permutation
from .biseries import BiSeries, UndefinedProduct, ConvergenceRegion, convergence_region, delta, geometric
from .cartan import CartanData, CartanError, NotSymmetrizable, load_cartan, symmetrize, validate_gcm
from .solutions import (
    SolutionFamily, FamilyError, basis_P, basis_Q, phi, psi, check_equation_c, check_pair,
    check_system1, taylor_solution, epsilon_constraint, general_offdiag, family_from_descriptor,
)
from .verifier import (
    IdentityInstance, VerdictReport, evaluate, verify, hypothesis_check, numeric_oracle,
    lemma2_sum, jing_sum, eq5_sum, serre_sum, prefactored_serre,
)
from . import kernel

__version__ = "0.1.0"
