"""riterp: LiDAR range-image degradation, gradient-aware interpolation,
and quality evaluation."""

from .baselines import SUPPORT, UpscaleSpec, kernel_weights, upscale_baseline
from .gradient import (
    ASCENDING,
    DESCENDING,
    CandidateSite,
    InterpolationPlan,
    InterpPolicy,
    explore_windows,
    interpolate,
    upscale_gradient,
)
from .lossy import QuantizerSpec, downsample_ri, lossy_roundtrip, quantize
from .metrics import KdTree, QualityReport, build_kdtree, chamfer, noise_ratio, ssim
from .pipeline import PipelineConfig, run_pipeline, run_scan, sweep
from .pointcloud import (
    PointCloud,
    filter_by_range,
    read_kitti_bin,
    read_ply,
    write_kitti_bin,
    write_ply,
)
from .projection import (
    EMPTY,
    KITTI_GEOMETRY,
    RangeImage,
    RiGeometry,
    cloud_to_ri,
    load_ri,
    occupancy,
    pixel_origins,
    ri_to_cloud,
    save_ri,
    write_pgm,
)
from .synth import synth_scene

__version__ = "0.1.0"
