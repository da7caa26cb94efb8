"""Non-Hermitian star-shaped quantum graphs and their metric operators."""

from .cryptoherm import (
    assemble_metric,
    build_h4,
    crypto_residual,
    fd_star_operator,
    metric_component,
    metric_inner_product,
    solve_metric_space,
    spectral_metric,
    spectrum_reality,
)
from .roots import (
    count_real_roots,
    find_exceptional_point,
    locate_complex_roots,
    scan_real_roots,
)
from .stargraph import (
    StarGraphSpec,
    closed_form_q6,
    edge_solution,
    secular_matrix,
    secular_scalar,
)

__version__ = "0.1.0"
