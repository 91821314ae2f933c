"""Exception hierarchy shared by all loopmodel modules."""


class LoopModelError(Exception):
    """Base class for all errors raised by this package."""


class AlgebraError(LoopModelError):
    """Invalid algebraic operation (zero denominator, degree of zero, ...)."""


class PoleError(AlgebraError):
    """A substitution or operator evaluation hit a pole."""


class PatternError(LoopModelError):
    """Invalid link pattern or operator/pattern mismatch."""


class ConstructionError(LoopModelError):
    """The solver could not complete (stuck worklist or inconsistent system)."""


class VerificationError(LoopModelError):
    """An exact identity that must hold was found violated."""


class BijectionError(LoopModelError):
    """A combinatorial bijection produced an invalid image."""
