"""State-vector simulator for single-photon interrogation of an atom in
superposition: joint photon-atom states, optical elements, protocol
runners, a witness-existence scanner, and a small circuit language."""

from .state import (
    BasisLayout,
    Branch,
    JointState,
    basis_state,
    condition_on_probe,
    fidelity,
    make_layout,
    partition_branches,
    photon_probe,
    product_factors,
    superpose,
)
from .elements import (
    AtomInteraction,
    BeamSplitter,
    Element,
    Mirror,
    POL_FLIP,
    PhaseShift,
    PolRotator,
    Relabel,
    apply_element,
    apply_sequence,
    sink_pair_labels,
)
from .protocols import (
    ATOM_LEVELS,
    AtomSpec,
    ConservationError,
    POL_STATES,
    ProtocolOutcome,
    ScanRow,
    assemble_outcome,
    build_mz,
    haar_random_atoms,
    make_classifier,
    mz_closed_form,
    run_direct,
    run_fabry_perot,
    run_mz_chain,
    run_sequence,
    run_two_pass,
    success_fidelity_scan,
)
from .nogo import (
    Absence,
    FinalStatePair,
    NogoRow,
    Witness,
    build_final_states,
    find_witness,
    grid_witness_search,
    transparency_nogo_scan,
)
from .dsl import (
    CircuitAst,
    CompileError,
    CompiledCircuit,
    ParseError,
    compile_circuit,
    load_golden,
    parse,
    print_circuit,
    run_compiled,
)

__version__ = "0.1.0"

__all__ = [
    "ATOM_LEVELS",
    "Absence",
    "AtomInteraction",
    "AtomSpec",
    "BasisLayout",
    "BeamSplitter",
    "Branch",
    "CircuitAst",
    "CompileError",
    "CompiledCircuit",
    "ConservationError",
    "Element",
    "FinalStatePair",
    "JointState",
    "Mirror",
    "NogoRow",
    "POL_FLIP",
    "POL_STATES",
    "ParseError",
    "PhaseShift",
    "PolRotator",
    "ProtocolOutcome",
    "Relabel",
    "ScanRow",
    "Witness",
    "apply_element",
    "apply_sequence",
    "assemble_outcome",
    "basis_state",
    "build_final_states",
    "build_mz",
    "compile_circuit",
    "condition_on_probe",
    "fidelity",
    "find_witness",
    "grid_witness_search",
    "haar_random_atoms",
    "load_golden",
    "make_classifier",
    "make_layout",
    "mz_closed_form",
    "parse",
    "partition_branches",
    "photon_probe",
    "print_circuit",
    "product_factors",
    "run_compiled",
    "run_direct",
    "run_fabry_perot",
    "run_mz_chain",
    "run_sequence",
    "run_two_pass",
    "sink_pair_labels",
    "success_fidelity_scan",
    "superpose",
    "transparency_nogo_scan",
]
