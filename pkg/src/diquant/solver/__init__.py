"""Dense semidefinite programming: problem model and interior-point solver."""

from .dump import capture, read_problem, write_problem
from .ipm import DEFAULTS, options, solve
from .problem import (
    Affine,
    AffineMatrix,
    HermitianEmbedding,
    LmiBlock,
    Model,
    ModelResult,
    SdpProblem,
    SdpSolution,
    SolverError,
    Status,
    affine_sum,
    block_diag_affine,
    embed_hermitian,
)

__all__ = [
    "capture", "read_problem", "write_problem", "DEFAULTS", "options", "solve", "Affine", "AffineMatrix", "HermitianEmbedding", "LmiBlock", "Model",
    "ModelResult", "SdpProblem", "SdpSolution", "SolverError", "Status", "affine_sum",
    "block_diag_affine", "embed_hermitian",
]
