"""Partial-sum trees, bucket-brigade qRAM simulation, and amplitude encoding.

The package builds the quantum-accessible data structure for signed real
vectors and matrices, simulates a circuit-level bucket-brigade memory with
qutrit switches, and runs the full state-preparation cascade with routing,
rotation and entanglement accounting.
"""

from .core import (BitPath, DegenerateInputError, InputError, SparseMatrix,
                   SparseVector, Tolerance, ZeroVectorError, l2_norm_squared,
                   next_power_of_two, pad_matrix_to_power_of_two,
                   pad_to_power_of_two)
from .kernels import BACKEND
from .kptree import KPForest, KPTree, build_forest, build_tree
from .qram import (BranchedQuery, LogEvent, QramInstance, QueryBranch,
                   QutritTreeState, RoutingError, RoutingLog, SwitchState,
                   fanout_switch_activations, time_steps)
from .simulator import RegisterLayout, StateVector, init_basis
from .stateprep import (LevelRecord, Metrics, PipelineError, PrepPlan, PrepResult,
                        SignRecord, WordCodec, apply_signs,
                        apply_signs_via_controlled_flip, encode_matrix,
                        load_ab_for_level, prepare_norms, prepare_row,
                        prepare_vector, rotation_probability,
                        unload_ab_for_level)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BitPath",
    "BranchedQuery",
    "DegenerateInputError",
    "InputError",
    "KPForest",
    "KPTree",
    "LevelRecord",
    "LogEvent",
    "Metrics",
    "PipelineError",
    "PrepPlan",
    "PrepResult",
    "QramInstance",
    "QueryBranch",
    "QutritTreeState",
    "RegisterLayout",
    "RoutingError",
    "RoutingLog",
    "SignRecord",
    "SparseMatrix",
    "SparseVector",
    "StateVector",
    "SwitchState",
    "Tolerance",
    "WordCodec",
    "ZeroVectorError",
    "apply_signs",
    "apply_signs_via_controlled_flip",
    "build_forest",
    "build_tree",
    "encode_matrix",
    "fanout_switch_activations",
    "init_basis",
    "l2_norm_squared",
    "load_ab_for_level",
    "next_power_of_two",
    "pad_matrix_to_power_of_two",
    "pad_to_power_of_two",
    "prepare_norms",
    "prepare_row",
    "prepare_vector",
    "rotation_probability",
    "time_steps",
    "unload_ab_for_level",
]
