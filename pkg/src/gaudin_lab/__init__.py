"""Gaudin algebras on tensor products, Bethe ansatz and sl2 opers, limit
algebras of boundary trees and eigenline coverings, at desk scale."""

__version__ = "0.1.0"

from ._accel import backend
from .lie import (IrrepSl2, LieAlgebraData, Subspace, TensorSpace, build_algebra, embed_factor, irrep_sl2,
                  isotypic_decomposition, singular_subspace, sl2_multiplicities, sln_defining_multiplicities)
from .operators import EXACT, FLOAT, OperatorMatrix
from .gaudin import (NORMALIZATION, GaudinParams, GeneratorSet, QuadraticGenFn, direct_generating_function,
                     filtration_degree, generating_function, generator_set, inhomogeneous_hamiltonian,
                     quadratic_hamiltonian)
from .spectral import (CyclicityReport, JointSpectrum, SpectrumVerdict, hermitian_check, is_cyclic,
                       joint_diagonalize, simple_spectrum)
from .bethe import BetheConfig, bethe_residual, bethe_search, solve_bethe
from .oper import (Sl2Oper, count_bijection, frobenius_obstruction, miura_oper, monodromy_report,
                   oper_from_eigenvalue, oper_space_dimension, residue_check)
from .universal import UElement
from .operad import (CollisionSchedule, OperadTree, SetPartition, collision_limit_check, d_homomorphism,
                     gamma_substitute, i_homomorphism, limit_algebra, limit_spectrum_suite)
from .covering import ParamPath, PermutationResult, cactus_loop_suite, track_eigenlines

__all__ = [name for name in dir() if not name.startswith("_")]
