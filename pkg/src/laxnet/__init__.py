"""Variational (Lax-formula) simulation and MIP optimization of continuous
supply-chain networks, with a finite-difference baseline."""

__version__ = "0.1.0"

from laxnet.network import (
    CumulativeCurve,
    Network,
    Node,
    PiecewiseAffine,
    PiecewiseConstant,
    Processor,
    TimeGrid,
    cumulative_from_rate,
    eval_left,
    hat_extend,
    split_heterogeneous,
)

__all__ = [
    "CumulativeCurve",
    "Network",
    "Node",
    "PiecewiseAffine",
    "PiecewiseConstant",
    "Processor",
    "TimeGrid",
    "cumulative_from_rate",
    "eval_left",
    "hat_extend",
    "split_heterogeneous",
]
