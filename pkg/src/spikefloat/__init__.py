"""Floating-point multiplication on simulated spiking neuron ensembles."""

from spikefloat.fields import Float32Fields, UnsupportedOperandError, parse_operand
from spikefloat.fpmul import DEFAULT_BUDGET, MultiplierCircuit, ProductResult
from spikefloat.gates import GateConfig
from spikefloat.nef import LifParameters, SimConfig
from spikefloat.oracle import ieee_mul_truncate

__all__ = [
    "DEFAULT_BUDGET",
    "Float32Fields",
    "GateConfig",
    "LifParameters",
    "MultiplierCircuit",
    "ProductResult",
    "SimConfig",
    "UnsupportedOperandError",
    "ieee_mul_truncate",
    "parse_operand",
]
