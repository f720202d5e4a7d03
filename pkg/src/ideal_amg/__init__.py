"""Ideal interpolation and two-grid convergence measures for AMG.

Dense, desk-scale tools to measure how well an interpolation ``P`` approximates
the ideal one, classify it against the ideal-interpolation sets, construct the
ideal ``P`` explicitly and run the symmetrized two-grid iteration.
"""

from .coarsening import (
    Decomposition,
    Prolongation,
    as_prolongation,
    cf_splitting,
    decomposition_from_r,
    general_p,
)
from .errors import (
    IdealAMGError, InputError, NotSpd, NotSymmetric, DimensionMismatch, ZeroVector,
    EmptySubspace, ConditionCViolated, EmptyCoarseSet, CoarseSetIsAll,
    SmootherNotAConvergent, MsNotSpd, NonPositiveEps, PartitionInvalid, SingularAcc,
    SingularSmoother, ParseError, UnsupportedField, IoError, NoConvergence,
    InternalInconsistency,
)
from .ideal import (
    ClassificationReport,
    check_rt_ideal,
    classify,
    epsilon_smoother,
    ideal_p0_direct,
    ideal_p0_via_s,
    range_equiv_p0,
    schur_smoothers,
    sigma_min_form,
)
from .linalg import SpdMatrix, a_norm, gen_eig_spd, principal_angles, sym_eig
from .measures import (
    MeasureReport,
    Smoother,
    k_measure,
    k_tg,
    measure_report,
    mu_star,
    mu_x,
    p_sharp,
    smoother_constants,
    theta_angle,
    worst_case_mu,
)
from .mmio import read_matrix_market, write_matrix_market
from .report import ReportDocument, read_report, write_report
from .twogrid import SolveTrace, TgSetup, build_e_tg, solve, tg_cycle

__version__ = "0.1.0"
