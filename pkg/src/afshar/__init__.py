"""Afshar two-slit experiment, its spin-1/2 pre/post-selection analogue, and an
offer/confirmation determinacy ledger."""

from .apparatus import AfsharConfig, ScenarioResult, SlitState, run_scenario
from .twostate import Basis2, Ket2, MeasurementChain, abl_probability, born_probability, spin_map

__all__ = [
    "AfsharConfig",
    "ScenarioResult",
    "SlitState",
    "run_scenario",
    "Basis2",
    "Ket2",
    "MeasurementChain",
    "abl_probability",
    "born_probability",
    "spin_map",
]
