from __future__ import annotations

from typing import Optional

from src.graph.laplacian import GRACE_JITTER, NORMALIZED_JITTER, with_jitter
from src.models import CvPlan, GracePenaltySpec, Method, PenaltyKind, PenaltyMatrix

RIDGE_H2 = 1.0


def default_jitter(kind: PenaltyKind) -> float:
    if kind == PenaltyKind.LAPLACIAN:
        return GRACE_JITTER
    if kind == PenaltyKind.NORMALIZED_LAPLACIAN:
        return NORMALIZED_JITTER
    return 0.0


def method_penalty(
    method: Method, penalty: Optional[PenaltyMatrix], jitter: Optional[float] = None
) -> Optional[PenaltyMatrix]:
    """Penalty matrix each method smooths with.

    Grace gets the default jitter for its penalty kind unless ``jitter`` is
    given; GraceR is jittered only on request.
    """
    if method in (Method.GRACEI, Method.RIDGE):
        return None
    if penalty is None:
        raise ValueError(f"method '{method.value}' needs a penalty matrix")
    if method == Method.GRACE:
        return with_jitter(penalty, default_jitter(penalty.kind) if jitter is None else jitter)
    return penalty if jitter is None else with_jitter(penalty, jitter)


def method_plan(method: Method, plan: CvPlan) -> Optional[CvPlan]:
    """Restrict the tuning grid to the parameters the method uses; ridge is not tuned."""
    if method == Method.GRACE:
        return plan.model_copy(update={"grid_2": (0.0,)})
    if method == Method.GRACEI:
        return plan.model_copy(update={"grid_g": (0.0,)})
    if method == Method.GRACER:
        return plan
    return None


def ridge_spec() -> GracePenaltySpec:
    return GracePenaltySpec(penalty=None, h_g=0.0, h_2=RIDGE_H2)
