"""Canvas-based partial-inspection scheduling for resource-limited perception."""

from .accuracy import (AccuracyProfile, SizeLadder, efficiency_terms, load_profile, lookup,
                       synthetic_profile, validate_profile)
from .baselines import PolicyKind, baseline_schedule
from .core import ConfigError, HorizonConfig, Rect, ResizePolicy, ResourceModel, iou, quantize
from .packing import GENERAL, QUANTIZED, Infeasible, Layout, PackItem, can_pack, pack
from .scheduler import (CSRAP, CanvasMapping, CanvasPlan, NoFeasibleCanvas, Schedule,
                        assign_timing, cgpois, cpois_assign, feasible_canvas_sizes, fsocm,
                        inspection_frequencies, predicted_max_uncertainty, validate_schedule)
from .tracking import (MotionEstimate, TrackedObject, associate, expand_region, growth_rate,
                       predict_box, uncertainty)

__all__ = [
    "AccuracyProfile", "SizeLadder", "efficiency_terms", "load_profile", "lookup",
    "synthetic_profile", "validate_profile", "PolicyKind", "baseline_schedule", "ConfigError",
    "HorizonConfig", "Rect", "ResizePolicy", "ResourceModel", "iou", "quantize", "GENERAL",
    "QUANTIZED", "Infeasible", "Layout", "PackItem", "can_pack", "pack", "CSRAP",
    "CanvasMapping", "CanvasPlan", "NoFeasibleCanvas", "Schedule", "assign_timing", "cgpois",
    "cpois_assign", "feasible_canvas_sizes", "fsocm", "inspection_frequencies",
    "predicted_max_uncertainty", "validate_schedule", "MotionEstimate", "TrackedObject",
    "associate", "expand_region", "growth_rate", "predict_box", "uncertainty",
]

__version__ = "0.1.0"
