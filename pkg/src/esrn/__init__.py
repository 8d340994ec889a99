"""Constrained training of windowed recurrent sequence classifiers.

Core pieces: the recurrence and its gradients (model, gradients), the
infinity-norm stability condition (echo_state), the constrained primal-dual
trainer and the clipped-descent baseline (primal_dual, clipping), synthetic
tasks (tasks), file formats (data_io), and an HTTP service plus CLI client
(service, cli).
"""

from .model import ArmaConfig, ForwardTrace, ModelParams, Sequence, forward, cost
from .gradients import GradSet, backprop, finite_diff
from .echo_state import check_sufficient, scale_to_inf_norm, verify_contraction

__all__ = [
    "ArmaConfig",
    "ForwardTrace",
    "GradSet",
    "ModelParams",
    "Sequence",
    "backprop",
    "check_sufficient",
    "cost",
    "finite_diff",
    "forward",
    "scale_to_inf_norm",
    "verify_contraction",
]

__version__ = "0.1.0"
