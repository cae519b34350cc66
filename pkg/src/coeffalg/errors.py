"""Exception hierarchy shared by every module of the package."""


class CStarError(Exception):
    """Base class for all errors raised by coeffalg."""


class StructuralError(CStarError, ValueError):
    """Shapes or algebras of the operands do not match."""


class RejectedInput(CStarError, ValueError):
    """An input failed a precondition (e.g. the map is not a *-endomorphism)."""


class NonDegeneracyViolation(RejectedInput):
    """The Ker/Im direct-sum decomposition could not be established."""


class NoCompleteTransfer(CStarError):
    """No complete transfer operator exists for the endomorphism.

    ``reason`` names the first failed criterion, one of
    ``PROJECTION_MISMATCH``, ``NON_INJECTIVE`` or ``HEREDITARY_FAILURE``.
    """

    PROJECTION_MISMATCH = "projection mismatch"
    NON_INJECTIVE = "non-injectivity"
    HEREDITARY_FAILURE = "hereditary failure"

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        msg = f"no complete transfer operator: {reason}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ResidualOverflow(CStarError):
    """A linear solve that should be consistent left a residual above eq_tol."""


class InternalConsistencyError(CStarError):
    """Independently computed conditions that must agree did not."""


class NumericalInstabilityError(CStarError):
    """A quantity that is PSD in exact arithmetic came out clearly indefinite."""
