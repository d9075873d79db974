"""Symmetric operators on weighted grids: deficiency analysis, self-adjoint
extensions, their flows and minimal position uncertainty."""

from .deficiency import DeficiencyReport, cayley_transform, classify, deficiency_spaces
from .errors import (ConfigurationError, ContractError, DimensionError, EigenvalueOneError,
                     FuzzyspecError, InfeasibleError, NumericalRankError, ParameterError,
                     SymmetryError)
from .extensions import (ExtensionParameter, SelfAdjointExtension, extend_by_boundary,
                         extend_by_cayley, spectrum)
from .flows import FlowUnitary, compose, flow_unitary, generated_algebra_dimension, local_phase_op
from .hilbert import Grid, SpectralData, Subspace, eigh, inner_product, norm, orthonormalize
from .operators import (BetaAlgebraModel, OperatorOnDomain, build_beta_algebra,
                        build_halfline_derivative, build_interval_derivative, build_matrix_model)
from .uncertainty import fuzzyB_localizing_sequence, min_uncertainty, sample_gup, uncertainty_curve

__version__ = "0.1.0"
