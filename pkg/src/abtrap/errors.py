"""Exception hierarchy shared by all abtrap modules.

Every error the library raises deliberately derives from AbtrapError so the
CLI can map failures onto its documented exit codes.  Anything else escaping
a module is a genuine bug.
"""


class AbtrapError(Exception):
    """Base class for all structured abtrap failures."""


class ExpressionParseError(AbtrapError):
    """Raised by the infix expression parser. Carries a 0-based position."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class ZeroDenominatorError(AbtrapError):
    """A substitution or arithmetic step produced an identically-zero denominator."""


class EvaluationError(AbtrapError):
    """Numeric evaluation failed: unbound symbol or singular point."""


class SignUndecidableError(AbtrapError):
    """A sign decision was requested for an expression whose sign does not
    follow from the declared positivity flags.  Deliberately an error, never
    a guess."""


class ReductionImpossible(AbtrapError):
    """The constraint matrix is degenerate: the bracket cannot be inverted,
    so no reduced (quantum) dynamics exists in this limit.

    Carries the offending ConstraintMatrix in .matrix when available.
    """

    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class ShapeMismatch(AbtrapError):
    """An input expression does not have the structural form an operation
    requires (e.g. a Hamiltonian whose surface restriction is not an
    isotropic quadratic, or constraints not solvable for the momenta)."""


class GridTooSmall(AbtrapError):
    """Eigenfunction tails are not negligible at the outer grid radius."""


class ConvergenceFailure(AbtrapError):
    """The eigensolver failed to converge for a sector."""


class TowerIdentificationError(AbtrapError):
    """Slow-branch level spacings are not mutually consistent, so no
    unambiguous tower frequency can be extracted."""


class NoSecularPeak(AbtrapError):
    """No spectral peak below half the drive frequency."""


class NumericalFailure(AbtrapError):
    """A numerical routine produced a non-finite or out-of-contract result."""


class ConfigError(AbtrapError):
    """Configuration text failed to parse or violated an invariant.

    line is the 1-based line number when the failure is tied to one.
    """

    def __init__(self, message, line=None, key=None):
        prefix = ""
        if line is not None:
            prefix = f"line {line}: "
        super().__init__(prefix + message)
        self.line = line
        self.key = key
