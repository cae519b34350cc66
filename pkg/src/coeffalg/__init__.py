"""Decide whether a finite-dimensional C*-algebra is a coefficient algebra
for a *-endomorphism, and build the witnessing representation."""

from .algebra import (Algebra, Element, Tolerance, adjoint, is_central_projection, is_positive, mul,
                      operator_norm)
from .doubling import DoublingInstance, make_doubling_instance
from .errors import (CStarError, InternalConsistencyError, NoCompleteTransfer, NonDegeneracyViolation,
                     NumericalInstabilityError, RejectedInput, ResidualOverflow, StructuralError)
from .maps import AlgebraMap, apply, verify_positive_map, verify_star_endomorphism, verify_transfer_pair
from .report import VerificationReport
from .transfer import (CompletenessCertificate, IdealDescription, check_complete, check_hereditary,
                       check_nondegenerate, check_partial_automorphism, compare_transfer_operators,
                       find_complete_transfer, kernel_image_decomposition)
from .witness import (LevelSpace, PositiveFunctional, TruncatedRepresentation, build_truncated_representation,
                      check_isometry_corollary, gram_matrix, verify_coefficient_relations,
                      verify_lemma_adjointness)

__version__ = "0.1.0"
