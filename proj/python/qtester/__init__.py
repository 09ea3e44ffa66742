"""Compatibility and robustness of quantum process testers.

The heavy lifting lives in the compiled extension; this package re-exports
its surface.
"""

from ._core import (  # noqa: F401
    QtesterError,
    Tester,
    ValidationError,
    __version__,
    ancilla_free_decomposition,
    angle_grid,
    born_probabilities,
    bounds,
    canonical_implementation,
    canonical_povm,
    choi_from_kraus,
    discrimination_bound,
    embed_complex,
    extremal_povm_decomposition,
    helstrom_success,
    identity_channel,
    make_tester,
    measurement_robustness,
    named_testers,
    partial_trace,
    partial_transpose,
    polarization_pair,
    povm_compatibility,
    psd_pinv_sqrt,
    psd_sqrt,
    region_m,
    region_m_witness,
    spectral_decompose,
    state_robustness,
    structural_predicates,
    sweep,
    sweep_csv,
    swap_operator,
    tensor,
    tester_compatibility,
    tester_from_json,
    tester_from_setup,
    tester_robustness,
    tester_robustness_bisection,
    tester_to_json,
    trace_norm,
    two_outcome_tester_compatibility,
    validate_ncomb,
    validate_ntester,
)
