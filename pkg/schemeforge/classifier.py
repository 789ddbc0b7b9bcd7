# schemeforge/classifier.py

# This module classifies hardware scale, problem scale, PDE type and linearity of field equations.

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import structlog

from schemeforge.config import EPS_SYM, EPS_ZERO, MULTISCALE_RATIO, WORKER_THRESHOLD
from schemeforge.exceptions import (
    DegenerateAllZero,
    MissingRepresentativeValue,
    NoDifferentialTerms,
    NoSecondOrderTerms,
    NonConstantFirstOrderCoefficients,
    NonSymmetricCoefficients,
)
from schemeforge.problem_spec import (
    TIME_AXIS,
    DomainSpec,
    FieldEquation,
    HardwareConfig,
    ScaleDecl,
)

logger = structlog.get_logger()


class PdeType(StrEnum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC_FIRST_ORDER = "hyperbolic_first_order"
    HYPERBOLIC_SECOND_ORDER = "hyperbolic_second_order"

    @property
    def is_hyperbolic(self) -> bool:
        return self in (PdeType.HYPERBOLIC_FIRST_ORDER, PdeType.HYPERBOLIC_SECOND_ORDER)


class Linearity(StrEnum):
    LINEAR = "linear"
    SEMILINEAR = "semilinear"
    QUASILINEAR = "quasilinear"
    FULLY_NONLINEAR = "fully_nonlinear"


class HardwareReason(StrEnum):
    GPU_ARCHITECTURE = "gpu_architecture"
    WORKER_THRESHOLD = "worker_threshold"
    BELOW_THRESHOLD = "below_threshold"


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """
    Symmetric matrix of second-derivative coefficients over the listed axes.
    """

    a: np.ndarray
    axis_labels: tuple[str, ...]

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        n = len(self.axis_labels)
        if a.shape != (n, n):
            raise ValueError(f"matrix shape {a.shape} does not match {n} axis labels")

        scale = np.max(np.abs(a)) if a.size else 0.0
        if np.max(np.abs(a - a.T), initial=0.0) > EPS_SYM * scale:
            raise NonSymmetricCoefficients(
                f"coefficient matrix is not symmetric within {EPS_SYM:g} relative"
            )
        object.__setattr__(self, "a", 0.5 * (a + a.T))

    def permuted(self, order: list[int]) -> "CoefficientMatrix":
        """Return the matrix with rows and columns reordered together."""
        idx = np.asarray(order)
        return CoefficientMatrix(
            self.a[np.ix_(idx, idx)], tuple(self.axis_labels[i] for i in order)
        )


@dataclass(frozen=True)
class PdeClassification:
    pde_type: PdeType
    eigenvalues: tuple[float, ...] = ()
    linearity: Linearity | None = None

    def describe(self) -> str:
        if not self.eigenvalues:
            return str(self.pde_type)
        values = ", ".join(f"{v:g}" for v in self.eigenvalues)
        return f"{self.pde_type} (eigenvalues {values})"


@dataclass(frozen=True)
class HardwareScale:
    massively_parallel: bool
    reason: HardwareReason

    def __post_init__(self):
        parallel_reasons = (HardwareReason.GPU_ARCHITECTURE, HardwareReason.WORKER_THRESHOLD)
        if self.massively_parallel != (self.reason in parallel_reasons):
            raise ValueError(f"reason {self.reason} contradicts massively_parallel={self.massively_parallel}")


def _axis_labels(eq: FieldEquation, domain: DomainSpec) -> tuple[str, ...]:
    # Time joins the matrix only for evolution equations
    if eq.uses_axis(TIME_AXIS):
        return (TIME_AXIS, *domain.axes)
    return domain.axes


def build_coefficient_matrix(eq: FieldEquation, domain: DomainSpec) -> CoefficientMatrix:
    """
    Collect the leading second-order coefficients into a symmetric matrix.

    Args:
        eq (FieldEquation): The field equation.
        domain (DomainSpec): Domain providing the spatial axes.

    Returns:
        CoefficientMatrix: Matrix over (t, x, ...) or (x, ...) when time is absent.

    Raises:
        NoSecondOrderTerms: If the equation has no order-2 term.
        MissingRepresentativeValue: If an order-2 coefficient has no value.
    """
    second = eq.terms_of_order(2)
    if not second:
        raise NoSecondOrderTerms(f"equation of '{eq.field}' has no second-order term")

    labels = _axis_labels(eq, domain)
    index = {axis: k for k, axis in enumerate(labels)}
    a = np.zeros((len(labels), len(labels)))

    for term in second:
        if term.coeff.value is None:
            raise MissingRepresentativeValue(
                f"second-order coefficient on {term.axes} of '{eq.field}' has no value"
            )
        i, j = index[term.axes[0]], index[term.axes[1]]
        if i == j:
            a[i, i] += term.coeff.value
        else:
            a[i, j] += 0.5 * term.coeff.value
            a[j, i] += 0.5 * term.coeff.value

    return CoefficientMatrix(a, labels)


def classify_second_order(m: CoefficientMatrix) -> PdeClassification:
    """
    Classify a second-order operator by the signs of its coefficient eigenvalues.

    Args:
        m (CoefficientMatrix): Symmetric coefficient matrix.

    Returns:
        PdeClassification: Type and ascending eigenvalues, linearity unset.

    Raises:
        DegenerateAllZero: If all eigenvalues vanish.
    """
    eigenvalues = np.linalg.eigvalsh(m.a)
    scale = np.max(np.abs(eigenvalues))
    if scale == 0.0:
        raise DegenerateAllZero("all eigenvalues of the coefficient matrix are zero")

    zero = np.abs(eigenvalues) <= EPS_ZERO * scale
    positive = np.count_nonzero((eigenvalues > 0) & ~zero)
    negative = np.count_nonzero((eigenvalues < 0) & ~zero)

    if positive and negative:
        pde_type = PdeType.HYPERBOLIC_SECOND_ORDER
    elif zero.any():
        pde_type = PdeType.PARABOLIC
    else:
        pde_type = PdeType.ELLIPTIC

    cleaned = tuple(0.0 if z else float(v) for v, z in zip(eigenvalues, zero))
    return PdeClassification(pde_type, cleaned)


def classify_first_order(eq: FieldEquation) -> PdeClassification:
    """
    Classify an equation without second-order terms.

    First order equations with constant real coefficients are hyperbolic.

    Args:
        eq (FieldEquation): Equation whose highest derivative order is at most one.

    Returns:
        PdeClassification: hyperbolic_first_order with no eigenvalues.

    Raises:
        ValueError: If the equation has a second-order term.
        NoDifferentialTerms: If there is no first-order term at all.
        NonConstantFirstOrderCoefficients: If a first-order coefficient is not constant.
    """
    if eq.terms_of_order(2):
        raise ValueError(f"equation of '{eq.field}' has second-order terms")

    first = eq.terms_of_order(1)
    if not first:
        raise NoDifferentialTerms(f"equation of '{eq.field}' has no derivative terms")

    for term in first:
        if not term.coeff.is_constant:
            raise NonConstantFirstOrderCoefficients(
                f"coefficient of d/d{term.axes[0]} in '{eq.field}' depends on "
                f"{', '.join(sorted(term.coeff.depends_on))}; classification needs expert input"
            )

    return PdeClassification(PdeType.HYPERBOLIC_FIRST_ORDER)


def classify_linearity(eq: FieldEquation) -> Linearity:
    """
    Place an equation in the linear / semilinear / quasilinear / fully nonlinear hierarchy.

    Args:
        eq (FieldEquation): The field equation.

    Returns:
        Linearity: The linearity class.
    """
    top = eq.max_order
    highest = [term.coeff.depends_on for term in eq.terms if term.order == top]
    lower = [term.coeff.depends_on for term in eq.terms if term.order < top]
    nonlinear_deps = {"solution", "lower_derivatives", "highest_derivatives"}

    if any("highest_derivatives" in deps for deps in [*highest, *lower, eq.rhs_depends_on]):
        return Linearity.FULLY_NONLINEAR
    if any(deps & {"solution", "lower_derivatives"} for deps in highest):
        return Linearity.QUASILINEAR
    if any(deps & nonlinear_deps for deps in [*lower, eq.rhs_depends_on]):
        return Linearity.SEMILINEAR
    return Linearity.LINEAR


def classify_equation(
    eq: FieldEquation, domain: DomainSpec, continuity: str | None = None
) -> PdeClassification:
    """
    Full PDE classification of one field equation, linearity included.

    A field declared discontinuous whose first-order structure cannot be checked
    is sent to the hyperbolic branch.

    Args:
        eq (FieldEquation): The field equation.
        domain (DomainSpec): The problem domain.
        continuity (str | None): The field's declared continuity expectation.

    Returns:
        PdeClassification: Type, eigenvalues and linearity.
    """
    linearity = classify_linearity(eq)

    if eq.terms_of_order(2):
        result = classify_second_order(build_coefficient_matrix(eq, domain))
    else:
        try:
            result = classify_first_order(eq)
        except (NonConstantFirstOrderCoefficients, NoDifferentialTerms):
            if continuity != "discontinuous":
                raise
            logger.info("Classified by continuity hint", field=eq.field)
            result = PdeClassification(PdeType.HYPERBOLIC_FIRST_ORDER)

    classification = PdeClassification(result.pde_type, result.eigenvalues, linearity)
    logger.debug(
        "Classified equation",
        field=eq.field,
        pde_type=str(classification.pde_type),
        linearity=str(linearity),
    )
    return classification


def classify_hardware(hw: HardwareConfig, worker_threshold: int = WORKER_THRESHOLD) -> HardwareScale:
    """
    Decide whether the target hardware counts as massively parallel.

    Args:
        hw (HardwareConfig): Target hardware.
        worker_threshold (int): Worker count from which CPU runs count as massively parallel.

    Returns:
        HardwareScale: Verdict and reason.
    """
    if hw.arch == "gpu":
        return HardwareScale(True, HardwareReason.GPU_ARCHITECTURE)
    if hw.workers >= worker_threshold:
        return HardwareScale(True, HardwareReason.WORKER_THRESHOLD)
    return HardwareScale(False, HardwareReason.BELOW_THRESHOLD)


def evaluate_multiscale(s: ScaleDecl, ratio_threshold: float = MULTISCALE_RATIO) -> bool:
    """
    Decide whether a problem spans multiple length scales.

    Args:
        s (ScaleDecl): Declared length scales and optional override.
        ratio_threshold (float): Largest-to-smallest ratio from which a problem is multiscale.

    Returns:
        bool: The override when given, else whether the scale ratio reaches the threshold.
    """
    if s.multiscale is not None:
        return s.multiscale

    ratio = max(s.lengths) / min(s.lengths)
    # Ratios such as 1e-5/1e-7 land a few ulps either side of the threshold
    return ratio >= ratio_threshold * (1.0 - 1e-12)
