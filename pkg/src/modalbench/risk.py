"""Generalized risk-coverage curves and their area, from (failure, uncertainty) pairs.

Outcomes are ranked by uncertainty; at each working point the joint risk is
the fraction of the whole set that is both accepted (among the most-confident
k) and wrong. The area under that curve summarizes silent-failure risk: it is
high when failures hide among the most-confident predictions and low when
mistakes carry high uncertainty. Lower is better; the score lives in
[0, 0.5], is 0 iff there are no failures, and depends on uncertainties only
through their ranks.

The area uses the trapezoid (midpoint) rule with joint_risk(0) = 0, which
preserves the analytic [0, 0.5] bound at finite N. Equal-uncertainty ties
collapse into a single working point, equivalent to averaging over all
within-tie orderings.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import EmptyInput

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoredOutcome:
    """One prediction outcome: wrong or not, and how uncertain the model was."""

    sample_id: str
    failure: int  # 1 = wrong prediction
    uncertainty: float  # semantic entropy by default; any rank score works


@dataclass(frozen=True)
class CurvePoint:
    coverage: float
    joint_risk: float


@dataclass(frozen=True)
class RiskCoverageCurve:
    points: tuple[CurvePoint, ...]
    augrc: float


def _validate_outcomes(outcomes: Sequence[ScoredOutcome]) -> None:
    if not outcomes:
        raise EmptyInput("no outcomes to rank")
    for outcome in outcomes:
        if outcome.failure not in (0, 1):
            raise ValueError(f"failure must be 0 or 1, got {outcome.failure!r}")
        if not math.isfinite(outcome.uncertainty):
            raise ValueError(
                f"uncertainty must be finite, got {outcome.uncertainty!r} "
                f"for sample {outcome.sample_id!r}"
            )


def grc_curve(outcomes: Sequence[ScoredOutcome]) -> RiskCoverageCurve:
    """Rank outcomes by uncertainty and integrate the joint-risk curve."""
    _validate_outcomes(outcomes)
    n = len(outcomes)
    uncertainty = np.array([o.uncertainty for o in outcomes], dtype=np.float64)
    failures = np.array([o.failure for o in outcomes], dtype=np.float64)

    order = np.argsort(uncertainty, kind="stable")
    u_sorted = uncertainty[order]
    cumulative_failures = np.cumsum(failures[order])

    # One working point per tie group (its last position).
    group_ends = np.append(np.nonzero(np.diff(u_sorted))[0], n - 1)
    coverage = (group_ends + 1) / n
    joint_risk = cumulative_failures[group_ends] / n

    cov = np.concatenate(([0.0], coverage))
    risk = np.concatenate(([0.0], joint_risk))
    augrc = float(np.sum(np.diff(cov) * (risk[1:] + risk[:-1]) / 2.0))

    points = tuple(
        CurvePoint(coverage=float(c), joint_risk=float(r))
        for c, r in zip(coverage, joint_risk)
    )
    return RiskCoverageCurve(points=points, augrc=augrc)


@dataclass(frozen=True)
class GroupRiskTable:
    """Per-group curves; empty groups are reported and skipped."""

    curves: dict[Hashable, RiskCoverageCurve]
    skipped: tuple[Hashable, ...]

    @property
    def augrc(self) -> dict[Hashable, float]:
        return {key: curve.augrc for key, curve in self.curves.items()}


def augrc_by_group(
    groups: Mapping[Hashable, Sequence[ScoredOutcome]],
) -> GroupRiskTable:
    """One risk-coverage curve per (model, configuration) group."""
    curves: dict[Hashable, RiskCoverageCurve] = {}
    skipped: list[Hashable] = []
    for key, outcomes in groups.items():
        if not outcomes:
            logger.warning("skipping empty outcome group %r", key)
            skipped.append(key)
            continue
        curves[key] = grc_curve(outcomes)
    return GroupRiskTable(curves=curves, skipped=tuple(skipped))


def curve_csv(curve: RiskCoverageCurve) -> str:
    """CSV with coverage and joint_risk columns for plotting."""
    lines = ["coverage,joint_risk"]
    lines.extend(f"{p.coverage!r},{p.joint_risk!r}" for p in curve.points)
    return "\n".join(lines) + "\n"
