# schemeforge/exceptions.py

# This module defines the exception hierarchy shared by all schemeforge modules.


class SchemeforgeError(Exception):
    """
    Base class for every error raised by schemeforge.
    """


# --- problem specification -------------------------------------------------


class SpecError(SchemeforgeError):
    """
    Base class for problem-spec reading and validation errors.

    Args:
        message (str): Human readable description.
        path (str): Dotted key path of the offending entry, empty for document level errors.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SpecSyntaxError(SpecError):
    """The document is not well-formed JSON."""


class SpecValidationError(SpecError):
    """A schema rule or cross-field invariant is violated."""


class UnsupportedFeature(SpecError):
    """The document requests something outside the supported method family."""


# --- classification --------------------------------------------------------


class ClassificationError(SchemeforgeError):
    """Base class for errors raised while classifying an equation."""


class NoSecondOrderTerms(ClassificationError):
    """The equation has no second-order term; use the first-order path."""


class DegenerateAllZero(ClassificationError):
    """Every eigenvalue of the coefficient matrix is zero."""


class NonConstantFirstOrderCoefficients(ClassificationError):
    """A first-order coefficient is not a real constant; needs expert input."""


class NoDifferentialTerms(ClassificationError):
    """The equation carries no derivative at all and no continuity hint."""


class NonSymmetricCoefficients(ClassificationError):
    """The coefficient matrix is not symmetric within tolerance."""


class MissingRepresentativeValue(ClassificationError):
    """A second-order coefficient has no value to use in the sign test."""


class SelectionError(ClassificationError):
    """
    A classifier error annotated with the field it occurred on.

    Args:
        field (str): Name of the field being classified.
        cause (ClassificationError): The underlying error.
    """

    def __init__(self, field: str, cause: ClassificationError):
        self.field = field
        self.cause = cause
        super().__init__(f"field '{field}': {type(cause).__name__}: {cause}")


# --- meshes ---------------------------------------------------------------


class MeshError(SchemeforgeError):
    """Base class for grid and mesh construction errors."""


class NonDivisibleExtent(MeshError):
    """The spacing does not divide an axis extent."""


class UnsupportedOrder(MeshError):
    """The requested polynomial order is outside the supported range."""


class SingularJacobian(MeshError):
    """A cell has a non-positive jacobian determinant."""


# --- solvers --------------------------------------------------------------


class SolverError(SchemeforgeError):
    """Base class for semi-discretization and time integration failures."""


class SizeMismatch(SolverError):
    """An array does not match the size of the discretization."""


class InvalidStepSize(SolverError):
    """The time step does not fit the requested span."""


class NonFiniteState(SolverError):
    """
    The state became non-finite during time integration.

    Args:
        step (int): Index of the step that produced the non-finite state.
    """

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite state after step {step}")


class NewtonDivergence(SolverError):
    """
    The Newton iteration of an implicit stage did not converge.

    Args:
        step (int): Index of the failing step.
        residual (float): Last residual norm.
    """

    def __init__(self, step: int, residual: float):
        self.step = step
        self.residual = residual
        super().__init__(
            f"Newton iteration did not converge in step {step} (residual {residual:.3e})"
        )


# --- measurements ---------------------------------------------------------


class MeasurementError(SchemeforgeError):
    """Base class for errors extracting observables from a state."""


class NoCrossing(MeasurementError):
    """The profile never crosses the 0.5 level."""


class MultipleCrossings(MeasurementError):
    """The profile crosses the 0.5 level more than once."""


class NegativeArea(MeasurementError):
    """The integrated phase is not positive."""


# --- problem families ------------------------------------------------------


class UnsupportedProblemFamily(SchemeforgeError):
    """The spec does not bind to a solvable benchmark family."""
