from .kernels import BACKEND
from .meanvalue import (
    DiophantineCount,
    InfeasibleSize,
    concentration_sup,
    ik_estimate,
    ik_uniform_importance,
    jk_count,
    jk_unit_cell_quadrature,
    remark3_check,
    verify_theorem7,
    verify_theorem8,
    verify_theorem9,
    verify_theorem10,
    vinogradov_constants,
    weyl_sum,
)

__all__ = [
    "BACKEND",
    "DiophantineCount",
    "InfeasibleSize",
    "concentration_sup",
    "ik_estimate",
    "ik_uniform_importance",
    "jk_count",
    "jk_unit_cell_quadrature",
    "remark3_check",
    "verify_theorem7",
    "verify_theorem8",
    "verify_theorem9",
    "verify_theorem10",
    "vinogradov_constants",
    "weyl_sum",
]
