"""Motion-compensated frame rate up-conversion with frequency-selective
mesh-to-grid resampling."""

__version__ = "0.1.0"

from .baselines import NweConfig, interpolate_cubic, interpolate_linear, interpolate_nwe
from .estimators import (
    AFSMRResampler,
    CubicResampler,
    FSMRResampler,
    LinearResampler,
    NadarayaWatsonResampler,
    make_resampler,
)
from .metrics import psnr, ssim
from .motion import (
    Affine,
    BlockMatchConfig,
    GlobalTranslation,
    estimate_block_matching,
    motion_compensate_forward,
    synthesize_flow,
)
from .resampler import ResamplerConfig, resample_frame
from .types import MeshPointSet, MotionField

__all__ = [
    "AFSMRResampler",
    "Affine",
    "BlockMatchConfig",
    "CubicResampler",
    "FSMRResampler",
    "GlobalTranslation",
    "LinearResampler",
    "MeshPointSet",
    "MotionField",
    "NadarayaWatsonResampler",
    "NweConfig",
    "ResamplerConfig",
    "estimate_block_matching",
    "interpolate_cubic",
    "interpolate_linear",
    "interpolate_nwe",
    "make_resampler",
    "motion_compensate_forward",
    "psnr",
    "resample_frame",
    "ssim",
    "synthesize_flow",
]
