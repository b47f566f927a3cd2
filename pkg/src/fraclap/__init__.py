"""Pseudospectral fractional Laplacian (-Delta)^(alpha/2) on the real line.

The real line is mapped onto (0, pi) through x = x_center + l_scale*cot(s),
functions are represented as trigonometric interpolants on half-shifted
equispaced nodes, and the operator is applied through a dense operational
matrix acting on the Fourier coefficients.  No domain truncation is involved.

Subpackages
-----------
grid        coordinate map and node generation
spectral    phase-shifted FFTs, parity extension, filtering, interpolation
gammaratio  stable precomputation of the gamma-function ratio tables
symbol      closed-form operator action on a single Fourier mode
opmatrix    assembly, caching and application of the operational matrix
oracles     independent ground truths: closed forms, Kummer 1F1, quadrature
fisher      fractional Fisher-KPP time integration and front-speed fitting
cli         command line driver
"""

from fraclap.grid import Extension, GridConfig, node_positions, nodes, s_to_x, x_to_s
from fraclap.spectral import (
    KRASNY_THRESHOLD,
    SpectralCoefficients,
    extend,
    forward,
    interpolate,
    inverse,
    krasny_filter,
    mode_numbers,
    regrid,
)
from fraclap.gammaratio import GammaRatioTables, build_tables, gamma_fn
from fraclap.symbol import SymbolParams, a_coeff, b_coeff, fractional_constant, symbol_samples
from fraclap.opmatrix import (
    MatrixCacheError,
    MatrixMeta,
    OperatorMatrix,
    apply,
    build_matrix,
    fractional_laplacian,
    fused_sample_operator,
    load_matrix,
    save_matrix,
)
from fraclap.oracles import (
    ErrorScan,
    QuadratureError,
    TestFunction,
    closed_form_gaussian,
    closed_form_mode2,
    error_scan,
    kummer_1f1,
    quadrature_fraclap,
    scale_sweep,
    test_function,
)
from fraclap.fisher import (
    BlowUpError,
    FisherResult,
    FisherRun,
    FrontEscapeError,
    FrontTrace,
    fit_sigma,
    front_position,
    initial_condition,
    rhs,
    rk4_step,
    run_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "Extension",
    "GridConfig",
    "nodes",
    "node_positions",
    "s_to_x",
    "x_to_s",
    "KRASNY_THRESHOLD",
    "SpectralCoefficients",
    "forward",
    "inverse",
    "extend",
    "krasny_filter",
    "interpolate",
    "regrid",
    "mode_numbers",
    "GammaRatioTables",
    "build_tables",
    "gamma_fn",
    "SymbolParams",
    "fractional_constant",
    "a_coeff",
    "b_coeff",
    "symbol_samples",
    "OperatorMatrix",
    "MatrixMeta",
    "MatrixCacheError",
    "build_matrix",
    "apply",
    "fractional_laplacian",
    "fused_sample_operator",
    "save_matrix",
    "load_matrix",
    "TestFunction",
    "test_function",
    "closed_form_mode2",
    "closed_form_gaussian",
    "kummer_1f1",
    "quadrature_fraclap",
    "error_scan",
    "scale_sweep",
    "ErrorScan",
    "QuadratureError",
    "FisherRun",
    "FisherResult",
    "FrontTrace",
    "BlowUpError",
    "FrontEscapeError",
    "initial_condition",
    "rhs",
    "rk4_step",
    "front_position",
    "fit_sigma",
    "run_simulation",
    "__version__",
]
