"""Residual minimization in the max and absolute-value norms over Krylov
subspaces, with a GMRES reference, brute-force oracles and experiment
generators."""

from ._accel import BACKEND_NAME, HAVE_COMPILED
from .errors import (
    DegenerateDirectionError,
    KrylovlpError,
    SingularMatrixError,
    StagnationError,
    UnboundedStepError,
)
from .gmres import GmresTrace, gmres_normal_equations, gmres_run
from .krylov import KrylovBasis, PreconditionedOperator, preconditioned_operator
from .l1 import l1_check_kkt, minimize_residual_l1
from .linf import linf_check_kkt, minimize_residual_linf
from .mmio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .oracle import OracleError, oracle_projected_l1, oracle_projected_linf
from .problems import (
    CorruptionSpec,
    build_ic0,
    gen_blur_square,
    gen_deblur_two_stencil,
    jacobi_factor,
)
from .qrupdate import QrFactors, qr_factor
from .runlog import ConvergenceRecord, SolveOptions, SolveResult, write_log_csv
from .sparse import (
    DenseOperator,
    LinearOperator,
    SparseMatrix,
    spmv,
    spmv_transpose,
    triangular_solve,
)

__all__ = [
    "BACKEND_NAME",
    "HAVE_COMPILED",
    "ConvergenceRecord",
    "CorruptionSpec",
    "DegenerateDirectionError",
    "DenseOperator",
    "GmresTrace",
    "KrylovBasis",
    "KrylovlpError",
    "LinearOperator",
    "OracleError",
    "PreconditionedOperator",
    "QrFactors",
    "SingularMatrixError",
    "SolveOptions",
    "SolveResult",
    "SparseMatrix",
    "StagnationError",
    "UnboundedStepError",
    "build_ic0",
    "gen_blur_square",
    "gen_deblur_two_stencil",
    "gmres_normal_equations",
    "gmres_run",
    "jacobi_factor",
    "l1_check_kkt",
    "linf_check_kkt",
    "minimize_residual_l1",
    "minimize_residual_linf",
    "oracle_projected_l1",
    "oracle_projected_linf",
    "preconditioned_operator",
    "qr_factor",
    "read_matrix_market",
    "read_vector",
    "spmv",
    "spmv_transpose",
    "triangular_solve",
    "write_log_csv",
    "write_matrix_market",
    "write_vector",
]

__version__ = "0.1.0"
