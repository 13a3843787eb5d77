"""Exception hierarchy shared by every layer of the package.

Inputs: None.
Outputs: `WelanderError` (a `ValueError`) for invalid input and domain violations, and
`InternalDefect` (a `RuntimeError`) for conditions that indicate a numerical inconsistency.
The CLI maps the first family to exit code 2 and the second to exit code 3.
"""

from __future__ import annotations


class WelanderError(ValueError):
    """Invalid input or a query outside the domain of an operation."""


class InvalidParameters(WelanderError):
    """A parameter set or run configuration violates a stated constraint."""


class ComplexSpectrum(WelanderError):
    """The matrix has complex eigenvalues (spiral case, not supported)."""


class SingularMatrix(WelanderError):
    """The matrix has zero determinant where an equilibrium is required."""


class ZeroEigenvalue(WelanderError):
    """An eigenvalue is zero where the operation divides by it."""


class VerticalInvariantLine(WelanderError):
    """An invariant line is vertical and has no slope/intercept form."""


class NoSignChange(WelanderError):
    """A root bracket does not enclose a sign change."""


class NotSlidingPoint(WelanderError):
    """The sliding vector field was requested at a crossing point."""


class BoundaryEquilibriumCollision(WelanderError):
    """A fold has a vanishing second Lie derivative: it meets a boundary equilibrium."""


class TangencyDegenerate(WelanderError):
    """The canonical reduction needs a12 of both zones to share a strict sign."""


class DegenerateAlpha(WelanderError):
    """alpha * (1 - beta) vanishes, so the canonical form does not exist."""


class DegenerateBeta(WelanderError):
    """beta = 1 gives repeated eigenvalues, excluded from the half-map theory."""


class NonpositiveSmoothing(WelanderError):
    """The arctan smoothing width must be strictly positive."""


class WrongRegime(WelanderError):
    """The queried half map needs a virtual equilibrium on its side."""


class OutOfDomain(WelanderError):
    """A half-map or displacement argument lies outside its domain."""


class AsymptoteReached(WelanderError):
    """The argument sits on the asymptote of the right half map."""


class NonzeroOffset(WelanderError):
    """The full-map Taylor data need the two folds to coincide (epsilon = 0)."""


class EscapingStart(WelanderError):
    """A trajectory cannot start on an escaping segment; the forward solution is not unique."""


class InternalDefect(RuntimeError):
    """A computation reached a state the analysis proves impossible."""


class BracketFailure(InternalDefect):
    """A root bracket could not be established where theory guarantees one."""


class EscapingArrival(InternalDefect):
    """A zone arc reached an escaping point of the switching line in forward time."""


class VisibilityMismatch(InternalDefect):
    """Analytic and finite-difference fold visibility disagree."""


class StatusMismatch(InternalDefect):
    """Threshold-based and geometric equilibrium status disagree."""
