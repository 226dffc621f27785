"""Semantic-region color correspondence warping and classical head compositing.

The library recolors an aligned grayscale head from a target image by
correlating pixel features only within matching semantic regions,
fills the background gap around the head the same way, and composites
the result back onto the target scene. A capped naive full-correlation
oracle and an entry-count benchmark document the memory reduction of
the region-restricted computation.
"""

from .bench import BenchResult, MemoryReport, memory_report, run_bench
from .compositor import composite, fill_inpainting, recolor_head
from .correspondence import (
    AttentionRow,
    CorrelationBlock,
    EmptyCycleDomainError,
    EntryLedger,
    accumulated_attention,
    attention_row,
    create_head_color_reference,
    create_inpainting_reference,
    cross_pair_cycle_loss,
    cycle_report,
    cycle_warp_and_loss,
    naive_full_correlation,
    region_correlation,
    softmax_rows,
    softmax_warp,
)
from .features import (
    FeatureFileError,
    FeatureMap,
    centralize,
    extract_pyramid_features,
    load_features,
    save_features,
)
from .metrics import l1_masked, psnr, ssim
from .pipeline import SwapResult, preprocess_pair, run_swap
from .preprocessing import (
    animated_inpaint_mask,
    background_cutout,
    dilate,
    grayscale_head,
    head_mask,
    target_inpaint_mask,
)
from .types import (
    BinaryMask,
    BlenderConfig,
    GrayImage,
    HEAD_LABEL_IDS,
    InvalidArgumentError,
    LabelMap,
    ReferenceImage,
    RegionIndex,
    RegionSpec,
    RgbImage,
    canonical_labels,
    default_region_specs,
)

__version__ = "0.1.0"
