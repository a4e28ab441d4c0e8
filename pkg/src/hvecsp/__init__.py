"""Finite-domain constraint solving over the hidden variable encoding.

The package accepts arbitrary n-ary constraint networks, rewrites them as
equivalent binary networks (one hidden variable per n-ary constraint, tied
to the originals by projection constraints), solves the binary network with
AC3-based propagation plus backtracking search, and maps solutions back.
"""

from .encode import (
    BinNetwork,
    HVar,
    OVar,
    Proj,
    RawVal,
    TupleVal,
    decode_solution,
    encode_network,
    encode_solution,
    expand,
)
from .model import (
    BasicConstraint,
    CheckReport,
    ContractError,
    CspError,
    Extension,
    Intention,
    InterpRegistry,
    Nary,
    Network,
    Violation,
    check_network,
    eval_constraint,
    is_solution,
    make_domain,
)
from .pipeline import (
    GenConfig,
    IllFormedNetworkError,
    OracleLimitError,
    enumerate_bin_solutions,
    enumerate_solutions,
    random_network,
    solve,
)
from .solver import (
    Arc,
    SearchStats,
    SolverState,
    check_bin_network,
    constraint_vars,
    interp_binary,
    propagate,
    revise,
    solve_bin,
)

__all__ = [
    "Arc",
    "BasicConstraint",
    "BinNetwork",
    "CheckReport",
    "ContractError",
    "CspError",
    "Extension",
    "GenConfig",
    "HVar",
    "IllFormedNetworkError",
    "Intention",
    "InterpRegistry",
    "Nary",
    "Network",
    "OVar",
    "OracleLimitError",
    "Proj",
    "RawVal",
    "SearchStats",
    "SolverState",
    "TupleVal",
    "Violation",
    "check_bin_network",
    "check_network",
    "constraint_vars",
    "decode_solution",
    "encode_network",
    "encode_solution",
    "enumerate_bin_solutions",
    "enumerate_solutions",
    "eval_constraint",
    "expand",
    "interp_binary",
    "is_solution",
    "make_domain",
    "propagate",
    "random_network",
    "revise",
    "solve",
    "solve_bin",
]
