"""clickseg: structure-based click guidance for interactive instance
segmentation, with a simulated-user benchmark and a live session service."""

from .core import (
    ChannelKind,
    GuidanceChannel,
    GuidanceStack,
    euclidean_guidance,
    gaussian_guidance,
    miou,
    prev_mask_channel,
    rescale_to_255,
)
from .guidance import (
    DEFAULT_LAYOUT,
    ClickSet,
    ScaleEstimate,
    assemble_stack,
    object_guidance,
    scale_filtered_object,
    scale_truncate_sp,
    superpixel_guidance,
)
from .interaction import (
    SamplingConfig,
    SessionState,
    correction_click,
    estimate_scale,
    make_reference_segmenter,
    run_session,
    sample_negative_clicks,
    sample_positive_clicks,
    scale_from_mask,
)
from .proposals import Proposal, ProposalSet, generate_proposals
from .superpixels import SuperpixelPartition, slic

__all__ = [
    "ChannelKind", "GuidanceChannel", "GuidanceStack", "euclidean_guidance",
    "gaussian_guidance", "miou", "prev_mask_channel", "rescale_to_255",
    "DEFAULT_LAYOUT", "ClickSet", "ScaleEstimate", "assemble_stack",
    "object_guidance", "scale_filtered_object", "scale_truncate_sp",
    "superpixel_guidance", "SamplingConfig", "SessionState",
    "correction_click", "estimate_scale", "make_reference_segmenter",
    "run_session", "sample_negative_clicks", "sample_positive_clicks",
    "scale_from_mask", "Proposal", "ProposalSet", "generate_proposals",
    "SuperpixelPartition", "slic",
]

__version__ = "0.1.0"
