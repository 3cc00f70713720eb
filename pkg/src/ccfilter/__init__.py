"""Behavioral simulation and design equations for a two-CCII voltage-mode
multifunction biquad (low-pass, high-pass, band-pass, notch)."""

from .circuit import (
    CCII,
    Capacitor,
    CircuitError,
    EvaluationAtPoleError,
    Netlist,
    NodeId,
    RationalTF,
    Resistor,
    VSource,
    canonicalize,
    evaluate,
    validate,
)
from .filter import (
    DesignParams,
    FilterDesign,
    FilterMode,
    InfeasibleTuningError,
    build_reference_netlist,
    design_params,
    nonideal_transfer_function,
    transfer_function,
    tune,
)
from .mna import (
    FitError,
    MnaSystem,
    SingularCircuitError,
    ac_sweep,
    assemble,
    extract_tf,
    solve,
)
from .netlist import NetlistSyntaxError, ParseError, parse_netlist, serialize_netlist
from .response import (
    FrequencyResponse,
    MeasuredParams,
    SweepTooNarrowError,
    UnclassifiableError,
    classify,
    measure,
)
from .sensitivity import (
    SensitivityReport,
    analytic_sensitivities,
    numeric_sensitivities,
)

__version__ = "0.1.0"
