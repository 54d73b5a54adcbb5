"""Desk-scale tools for high-definition FMCW MIMO radar.

Synthetic ADC frames, the classical range-Doppler / angle processing chain,
a MIMO de-interleaving pre-encoder, a from-scratch multi-task network that
consumes raw RD tensors, detection and free-space metrics, and an analytic
complexity profiler. Everything runs on numpy; no GPU or framework needed.
"""

from .config import (RadarConfig, ValidatedConfig, config_from_json,
                     config_to_json, load_config, paper_preset, preset,
                     toy_preset, validate)
from .dsp import (RadarPoint, RdTensor, aoa_correlate, aoa_estimate,
                  build_ra_map, cfar_detect, extract_point_cloud,
                  group_replicas, range_doppler_transform)
from .errors import (BothZero, CellOutOfRange, ConfigMismatch, FormatError,
                     InvalidConfig, InvalidScene, NonIntegerDilation,
                     NumericalFailure, OutOfFieldOfView, ProbabilityOutOfRange,
                     RdnetError, ReplicaOverflow, ShapeMismatch,
                     SpecInconsistent, WindowTooLarge)
from .mimo import (DeinterleavedTensor, atrous_equivalence_weights,
                   deinterleave, stack_real_imag)
from .simulate import (AdcFrame, PointTarget, Scene, calibration_matrix,
                       check_scene, expected_rd_positions, load_scene,
                       scene_from_json, scene_to_json, steering_vector,
                       synthesize_adc)
from .tensorfile import read_tensor, tensor_from_bytes, tensor_to_bytes, write_tensor

__version__ = "0.1.0"

__all__ = [
    "AdcFrame", "BothZero", "CellOutOfRange", "ConfigMismatch",
    "DeinterleavedTensor", "FormatError", "InvalidConfig", "InvalidScene",
    "NonIntegerDilation", "NumericalFailure", "OutOfFieldOfView",
    "PointTarget", "ProbabilityOutOfRange", "RadarConfig", "RadarPoint",
    "RdTensor", "RdnetError", "ReplicaOverflow", "Scene", "ShapeMismatch",
    "SpecInconsistent", "ValidatedConfig", "WindowTooLarge",
    "aoa_correlate", "aoa_estimate", "atrous_equivalence_weights",
    "build_ra_map", "calibration_matrix", "cfar_detect", "check_scene",
    "config_from_json", "config_to_json", "deinterleave",
    "expected_rd_positions", "extract_point_cloud", "group_replicas",
    "load_config", "load_scene", "paper_preset", "preset",
    "range_doppler_transform", "read_tensor", "scene_from_json",
    "scene_to_json", "stack_real_imag", "steering_vector", "synthesize_adc",
    "tensor_from_bytes", "tensor_to_bytes", "toy_preset", "validate",
    "write_tensor",
]
