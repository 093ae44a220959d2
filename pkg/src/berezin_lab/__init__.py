"""Berezin symbols, Berezin numbers and machine checks of Berezin number inequalities."""

from .berezin import (
    BerezinEstimate,
    berezin_c,
    berezin_norm,
    berezin_number,
    berezin_set,
    berezin_symbol,
    numerical_radius,
)
from .bounds import BoundReport, minimize_bound_over_alpha
from .rkhs import KernelSpace, SamplePlan, default_sample, kernel_vector, make_space, normalized_kernel

__version__ = "0.1.0"

__all__ = [
    "BerezinEstimate",
    "BoundReport",
    "KernelSpace",
    "SamplePlan",
    "berezin_c",
    "berezin_norm",
    "berezin_number",
    "berezin_set",
    "berezin_symbol",
    "default_sample",
    "kernel_vector",
    "make_space",
    "minimize_bound_over_alpha",
    "normalized_kernel",
    "numerical_radius",
]
