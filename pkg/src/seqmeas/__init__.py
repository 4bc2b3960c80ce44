"""Sequential quantum measurement procedures, property testers and experiments."""

from .states import (
    DensityOperator,
    EigenDecomposition,
    HermitianOperator,
    PureState,
    RegisterShape,
    basis_state,
    bell_pair,
    eigendecompose,
    ghz_state,
    plus_state,
    product_state,
    qubit_shape,
    reduced_density,
    subsystem_purity,
    trace_distance_matrix,
    trace_distance_pure,
)
from .gates import (
    GateSpec,
    PermutationAction,
    apply_gate,
    apply_gates,
    dense_gate_matrix,
    permutation_unitary,
    qft_matrix,
    qft_zn,
)
from .measurement import (
    NaimarkForm,
    TrajectoryRecord,
    TwoOutcomeMeasurement,
    UnionBoundResult,
    accept_probability,
    anti_zeno_accept_ever,
    anti_zeno_sequence,
    anti_zeno_state,
    build_averaged_naimark,
    gentle_measurement_gap,
    measure_collapse,
    measure_register_collapse,
    naimark_form,
    one_ancilla_dilation,
    trivial_naimark,
    union_bound_bruteforce,
)
from .quantum_or import (
    MWInstance,
    MWResult,
    demerlinize_accept_exact,
    demerlinize_round_count,
    demerlinize_test,
    merlin_best_witness_accept,
    merlin_slice_operators,
    mw_accept_exact,
    mw_accept_from_spectrum,
    mw_accept_survival,
    mw_bounds,
    or_round_count,
    or_test,
    or_test_accept_exact,
    run_averaged_or_sampled,
    run_mw_sampled,
    run_mw_sampled_batch,
)
from .disturbance import (
    SequentialExactResult,
    SequentialInstance,
    exact_sequential_accept,
    run_sequential_sampled,
    run_sequential_sampled_batch,
    sequential_iteration_count,
    completeness_bound_sweep,
)
from .testers import (
    FunctionTable,
    GIsoRun,
    UnitarySet,
    UnitarySetRun,
    analytic_eigen_accept,
    choi_state,
    choi_vector,
    cut_product_accept,
    cut_product_test,
    eigen_copies,
    eigen_measurement_cycle,
    eigen_or_accept_exact,
    eigen_test,
    eigen_tester_state,
    function_state,
    g_iso_accept_exact,
    g_iso_test,
    genuine_ent_accept_exact,
    genuine_ent_copies,
    genuine_ent_test,
    hs_distance,
    hs_inner,
    membership_accept_exact,
    membership_copies,
    pair_state,
    proper_cuts,
    state_membership_test,
    unitary_s_iso_accept_exact,
    unitary_s_iso_test,
    unitary_set_test,
)
from .experiments import ExperimentConfig, ExperimentRecord, run_experiment
from .rng import trial_rng

__all__ = [name for name in dir() if not name.startswith("_")]
