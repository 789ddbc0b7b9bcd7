# schemeforge/scheme_selector.py

# This module walks the scheme decision process per field and records the decision trail.

from dataclasses import dataclass
from enum import StrEnum

import structlog

from schemeforge.classifier import (
    Linearity,
    classify_equation,
    classify_hardware,
    evaluate_multiscale,
)
from schemeforge.config import MULTISCALE_RATIO, WORKER_THRESHOLD
from schemeforge.exceptions import ClassificationError, SelectionError
from schemeforge.problem_spec import ProblemSpec

logger = structlog.get_logger()

NODE_IDS = ("P1", "P2", "P3", "P4", "D1", "D2", "D3", "D4", "D5")
SCHEME_NODES = ("D1", "D3", "D4")
DECISION_COLUMNS = ("D1", "D2", "D3", "D4")


class Scheme(StrEnum):
    FDM = "FDM"
    FVM = "FVM"
    CGM = "CGM"
    DGM = "DGM"


@dataclass(frozen=True)
class TrailEntry:
    node: str
    verdict: str

    def __post_init__(self):
        if self.node not in NODE_IDS:
            raise ValueError(f"unknown decision node '{self.node}'")


@dataclass(frozen=True)
class SchemeAssignment:
    """
    The scheme chosen for one governed field and the path that led to it.
    """

    field: str
    scheme: Scheme
    trail: tuple[TrailEntry, ...]

    def __post_init__(self):
        if not self.trail or self.trail[0].node != "P1":
            raise ValueError("a decision trail starts at P1")
        if self.trail[-1].node not in SCHEME_NODES:
            raise ValueError("a decision trail ends at a scheme-emitting node")

    def verdict(self, node: str) -> str | None:
        for entry in self.trail:
            if entry.node == node:
                return entry.verdict
        return None


def format_trail(trail: tuple[TrailEntry, ...]) -> str:
    """
    Render a trail as 'P1:verdict;P2:verdict;...' for CSV output.

    Args:
        trail (tuple[TrailEntry, ...]): The decision trail.

    Returns:
        str: Machine-readable single-line rendering.
    """
    return ";".join(f"{entry.node}:{entry.verdict}" for entry in trail)


def decision_columns(assignment: SchemeAssignment) -> list[str]:
    """
    D1..D4 verdicts for the summary table, 'n.a.' for nodes not visited.
    """
    return [assignment.verdict(node) or "n.a." for node in DECISION_COLUMNS]


def select_schemes(
    spec: ProblemSpec,
    worker_threshold: int = WORKER_THRESHOLD,
    multiscale_ratio: float = MULTISCALE_RATIO,
) -> list[SchemeAssignment]:
    """
    Assign a numerical scheme to every governed field of a problem.

    Massively parallel or multiscale problems take DGM for every field. Otherwise
    continuous (parabolic, elliptic) fields take FDM on cartesian domains and CGM on
    irregular ones, and hyperbolic fields take DGM when linear or semilinear and FVM
    when quasilinear or fully nonlinear.

    Args:
        spec (ProblemSpec): A validated problem.
        worker_threshold (int): Workers from which CPU hardware counts as massively parallel.
        multiscale_ratio (float): Scale ratio from which a problem counts as multiscale.

    Returns:
        list[SchemeAssignment]: One assignment per governed field, in declaration order.

    Raises:
        SelectionError: If a field equation cannot be classified.
    """
    hardware = classify_hardware(spec.hardware, worker_threshold)
    multiscale = evaluate_multiscale(spec.scales, multiscale_ratio)
    override = hardware.massively_parallel or multiscale

    prefix = (
        TrailEntry(
            "P1",
            f"{'massively parallel' if hardware.massively_parallel else 'not massively parallel'}"
            f" ({hardware.reason}, {spec.hardware.workers} {spec.hardware.arch} workers)",
        ),
        TrailEntry("P2", "multiscale" if multiscale else "single scale"),
        TrailEntry("D1", "yes" if override else "no"),
    )

    assignments = []
    for decl in spec.governed_fields():
        if override:
            assignments.append(SchemeAssignment(decl.name, Scheme.DGM, prefix))
            continue

        eq = spec.equation_for(decl.name)
        try:
            classification = classify_equation(eq, spec.domain, decl.continuity)
        except ClassificationError as e:
            logger.error("Field could not be classified", field=decl.name, error=str(e))
            raise SelectionError(decl.name, e) from e

        trail = [*prefix, TrailEntry("P3", classification.describe())]
        if classification.pde_type.is_hyperbolic:
            linearity = classification.linearity
            trail += [
                TrailEntry("D2", "hyperbolic"),
                TrailEntry("P4", str(linearity)),
                TrailEntry("D4", str(linearity)),
            ]
            if linearity in (Linearity.LINEAR, Linearity.SEMILINEAR):
                scheme = Scheme.DGM
            else:
                scheme = Scheme.FVM
        else:
            # Elliptic and parabolic share the continuous branch
            trail += [
                TrailEntry("D2", "parabolic or elliptic"),
                TrailEntry("D3", spec.domain.geometry),
            ]
            scheme = Scheme.FDM if spec.domain.geometry == "cartesian_regular" else Scheme.CGM

        assignments.append(SchemeAssignment(decl.name, scheme, tuple(trail)))

    logger.info(
        "Selected schemes",
        problem=spec.name,
        override=override,
        assignments={a.field: str(a.scheme) for a in assignments},
    )
    # D5: loop closes once every governed field has a scheme
    return assignments
