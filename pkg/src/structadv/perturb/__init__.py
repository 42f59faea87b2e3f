from .projections import project_l2_ball, project_simplex
from .samplewise import SampleWiseAttack, fgsm_step, pgd_attack
from .states import (
    LdatState,
    MatState,
    PerturbationState,
    UniversalState,
    ldat_combined,
    ldat_inner_step,
    mat_combined,
    mat_inner_step,
    uat_inner_step,
)

__all__ = [
    "LdatState",
    "MatState",
    "PerturbationState",
    "SampleWiseAttack",
    "UniversalState",
    "fgsm_step",
    "ldat_combined",
    "ldat_inner_step",
    "mat_combined",
    "mat_inner_step",
    "pgd_attack",
    "project_l2_ball",
    "project_simplex",
    "uat_inner_step",
]
