"""Exception hierarchy shared by all modules."""


class HolantError(Exception):
    """Base class for all errors raised by this package."""


class DivisionByZero(HolantError):
    """Inversion of the zero field element."""


class SingularMatrix(HolantError):
    """Inversion of a 2x2 matrix with zero determinant."""


class ArityLimit(HolantError):
    """An operation would produce a signature of arity above the cap."""


class InvalidLoop(HolantError):
    """Self loop on a single input slot."""


class ZeroSignature(HolantError):
    """The all-zero signature was passed where a non-zero one is required."""


class ContractionOverflow(HolantError):
    """Pairwise contraction produced an intermediate tensor above the arity cap."""


class NotInFamily(HolantError):
    """A family-specific evaluator was applied outside its family."""


class ProfileUndefined(HolantError):
    """A distance profile's A or B set is empty."""


class ExhaustionFailure(HolantError):
    """An exhaustive search guaranteed to succeed found nothing (violated precondition)."""


class AllDegenerate(HolantError):
    """Every candidate symmetrisation gadget came out degenerate."""


class InternalCaseGap(HolantError):
    """The classifier hit a branch that should be impossible; indicates a defect."""


class FormatError(HolantError):
    """Malformed input file or literal."""
