"""Laser-channel simulation from the Kraus-form solution of the gain/loss master equation."""

__version__ = "0.1.0"

from .channel import (  # noqa: E402
    LaserParams,
    Regime,
    TCoefficients,
    evolve_auto,
    evolve_diagonal,
    evolve_fock,
    kraus_operator,
    kraus_weight,
    steady_state,
    t_coeffs,
    trace_defect,
)
from .entropy import (  # noqa: E402
    EntropyBounds,
    coherent_entropy,
    entropy_asymptote,
    p_mixture_entropy_lower_bound,
    specific_entropy,
    steady_entropy,
)
from .fock import (  # noqa: E402
    FockBasis,
    coherent_mixture,
    coherent_state,
    expect_a2dag_a2,
    expect_n,
    expect_n2,
    number_state,
    thermal_state,
    von_neumann_entropy,
)
from .heisenberg import (  # noqa: E402
    evolved_exp_lambda_n,
    evolved_normal_moment,
    expected_n,
    g2,
    g2_infinity,
    moment_coefficients,
    moment_growth_rate,
)
from .lindblad import IntegratorConfig, integrate, lindblad_rhs  # noqa: E402
