"""Sampling and analysis of shallow 2D random quantum circuits."""

from ._core import (
    NumericalFailure,
    ResourceCapExceeded,
    brickwork_couplings,
    cmi_decay_scan,
    dephased_cmi_infinite_q,
    entanglement_scan,
    exact_distribution,
    patch_sample,
    probability,
    quasi_entropy_scan,
    sample,
    sebd_total_variation,
    spectrum_fit,
    toy_model_spectrum,
    triangular_critical_q,
    weak_measurement_couplings,
    weingarten_k2,
)

__version__ = "0.1.0"

__all__ = [
    "NumericalFailure",
    "ResourceCapExceeded",
    "brickwork_couplings",
    "cmi_decay_scan",
    "dephased_cmi_infinite_q",
    "entanglement_scan",
    "exact_distribution",
    "patch_sample",
    "probability",
    "quasi_entropy_scan",
    "sample",
    "sebd_total_variation",
    "spectrum_fit",
    "toy_model_spectrum",
    "triangular_critical_q",
    "weak_measurement_couplings",
    "weingarten_k2",
]
