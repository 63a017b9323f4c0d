"""Binary filtrations, local orthonormal systems and Bernstein-inequality
diagnostics for nonlinear n-term approximation."""

from ._core import (  # noqa: F401
    Filtration,
    InvalidArgument,
    NumericalError,
    choose_j,
    decompose_fat,
    dictionary_errors,
    dyadic_filtration,
    enumerate_fat_chains,
    estimate_bi,
    example55_chain,
    greedy_errors,
    haar_values,
    hermite_norms,
    lambda_sequence,
    random_filtration,
    regular_filtration,
    special_1d_scan,
    tau_norm,
    thm42_filtration,
    w1_report,
    w2_report,
    w2s_report,
    __version__,
)
