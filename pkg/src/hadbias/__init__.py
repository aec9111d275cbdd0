"""Biased-noise Hadamard tests.

Build, simulate, certify and benchmark quantum circuits whose only noise
is (possibly correlated) bit-flips: construct noise-resilient Hadamard
tests, verify the attenuated reduced state against an exact
density-matrix oracle, estimate the ideal overlap classically in
polynomial time, and diagnose hardware that deviates from the biased
noise model.
"""

from ._kernels import backend_name
from .benchmark import (
    BenchmarkVerdict,
    CoherentX,
    ExperimentCounts,
    ImperfectBias,
    Miscalibrated,
    NoiseScenario,
    PerfectBias,
    Prediction,
    compare,
    predict,
    simulate_experiment,
    theorem1_decompose,
)
from .biascheck import (
    BiasCertificate,
    ControlledCheck,
    Counterexample,
    PropagationResult,
    certify_bias_preserving,
    check_controlled,
    is_x_type,
    propagate_error,
)
from .builder import (
    BuildReport,
    HadamardTestSpec,
    NoiseAssignment,
    build,
    count_locations,
    entangler_depth,
)
from .circuit import (
    BiasPerm,
    Circuit,
    CtrlX,
    CtrlZ,
    GateInstance,
    LocalGate,
    MeasurementSpec,
    Named,
    NoiseChannel,
    PrepState,
    RegisterLayout,
    ValidationReport,
    XDiag,
    XMask,
    act_bias_gate,
    all_sign_strings,
    bias_perm_gate,
    cnot,
    ctrl_x_gate,
    ctrl_z_gate,
    cxx,
    eigenvalue_xdiag,
    identity_gate,
    index_signs,
    named_gate,
    sample_noise,
    sign_index,
    toffoli_prime,
    validate_circuit,
    xdiag_gate,
    xrot_gate,
)
from .dense import (
    ReducedStateSummary,
    evolve_density,
    evolve_pure,
    exact_overlap,
    fit_reduced_form,
    gate_unitary,
    overlap_to_yz,
    reduce_qubit,
    trace_distance,
)
from .fastsim import (
    DephasedInput,
    EstimateResult,
    EstimationPlan,
    dephase_prep,
    estimate_overlap,
    exact_sum_small,
    hoeffding_shots,
)
from .noise import (
    AttenuationReport,
    ConstantNV,
    ConstantP,
    DeltaPower,
    MeasurementScalingReport,
    OverheadSchedule,
    SqrtLogDelta,
    SqrtLogNV,
    attenuation,
    direct_measure_brute_force,
    direct_measure_scaling,
    overhead_schedule,
    sample_complexity,
)
from .serial import (
    circuit_from_jsonable,
    circuit_to_jsonable,
    dumps_circuit,
    load_circuit,
    loads_circuit,
    save_circuit,
)

__version__ = "0.1.0"
