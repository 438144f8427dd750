"""Induction-motor DTC bench: conventional and fuzzy-SVM direct torque control."""
from ._jit import USING_NUMBA
from .engine import ScenarioConfig, TimeSeriesLog, run_scenario, CDTC, FLSVM
from .plant import MachineParams, MachineState, SwitchState

__version__ = "0.1.0"
