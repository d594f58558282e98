"""End-to-end experiment orchestration.

One scan flows through: ingest -> range filter -> project (reference RI)
-> degrade (decimate, optional quantization) -> interpolate -> reconstruct
-> score. Reports are flat dicts (config echo + scores + per-stage wall
times) so they serialize directly to JSON objects or CSV rows.

Scores are measured against the pre-degradation projection: SSIM compares
RIs at the upscaled resolution, and the 3D metrics compare against the
cloud reconstructed from the reference RI (which contains every source
point the degraded image kept, when quantization is off).
"""
from __future__ import annotations

import csv
import itertools
import json
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .baselines import UpscaleSpec, upscale_baseline
from .gradient import ASCENDING, InterpPolicy, upscale_gradient
from .lossy import QuantizerSpec, downsample_ri, quantize
from .metrics import KdTree, QualityReport, chamfer, noise_ratio, ssim
from .pointcloud import PointCloud, filter_by_range, read_kitti_bin, read_ply, write_ply
from .projection import (
    RangeImage,
    RiGeometry,
    cloud_to_ri,
    occupancy,
    pixel_origins,
    ri_to_cloud,
    write_pgm,
)
from .synth import synth_scene

METHODS = ("none", "bilinear", "bicubic", "lanczos3", "gradient")

#: points reconstructed from source pixels (white) vs interpolated pixels (red)
SOURCE_COLOR = (200, 200, 200)
INTERP_COLOR = (255, 40, 40)


@dataclass
class PipelineConfig:
    """Every knob of one experiment run. Component invariants (geometry,
    quantizer, policy) are enforced on construction."""

    inputs: list[str] = field(default_factory=list)
    width: int = 2048
    height: int = 64
    pitch_max: float = 2.0
    pitch_min: float = -24.8
    min_depth: float = 2.0
    max_depth: float = 120.0
    range_min: float = 2.0
    range_max: float = 120.0
    factor_x: int = 2
    factor_y: int = 1
    bits: int | None = None
    method: str = "gradient"
    window_w: int = 32
    window_h: int = 4
    policy_order: str = ASCENDING
    grad_threshold: float = 2.5
    max_fills: int | None = None
    delta: float = 0.5
    out_dir: str = "riterp-out"
    report_format: str = "json"
    no_artifacts: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.report_format not in ("json", "csv"):
            raise ValueError(f"report format must be json or csv, got {self.report_format!r}")
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.method == "gradient" and (self.factor_x, self.factor_y) != (2, 1):
            raise ValueError(
                f"gradient interpolation is 2x horizontal only, got factors "
                f"({self.factor_x}, {self.factor_y})"
            )
        self.geometry  # validate RiGeometry invariants
        self.policy    # validate InterpPolicy invariants
        if self.bits is not None:
            QuantizerSpec(self.bits, self.min_depth, self.max_depth)

    @property
    def geometry(self) -> RiGeometry:
        return RiGeometry(
            width=self.width, height=self.height,
            pitch_max=self.pitch_max, pitch_min=self.pitch_min,
            min_depth=self.min_depth, max_depth=self.max_depth,
        )

    @property
    def policy(self) -> InterpPolicy:
        return InterpPolicy(
            order=self.policy_order,
            max_fills_per_window=self.max_fills,
            gradient_threshold=self.grad_threshold,
        )

    def echo(self) -> dict:
        """Flat (scalars-only) copy of every config field, so reports are
        self-describing in both JSON and CSV."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = ";".join(value) if isinstance(value, list) else value
        return out


class StageError(RuntimeError):
    """Raised when one pipeline stage fails; names the stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause


def load_scan(spec: str) -> PointCloud:
    """Load one input: 'synth:<seed>', a .bin scan, or a .ply cloud."""
    if spec.startswith("synth:"):
        return synth_scene(int(spec.split(":", 1)[1]))
    path = Path(spec)
    if not path.exists():
        raise FileNotFoundError(f"input not found: {spec}")
    if path.suffix == ".ply":
        return read_ply(path)
    return read_kitti_bin(path)


def degrade_ri(ri: RangeImage, config: PipelineConfig) -> RangeImage:
    out = downsample_ri(ri, config.factor_x, config.factor_y)
    if config.bits is not None:
        out = quantize(out, QuantizerSpec(config.bits, config.min_depth, config.max_depth))
    return out


def upscale_ri(ri: RangeImage, config: PipelineConfig) -> RangeImage | None:
    """Apply the configured interpolation; None for method 'none'."""
    if config.method == "none":
        return None
    if config.method == "gradient":
        return upscale_gradient(ri, config.window_w, config.window_h, config.policy)
    spec = UpscaleSpec(factor_x=config.factor_x, factor_y=config.factor_y, method=config.method)
    return upscale_baseline(ri, spec)


def interp_mask(ri: RangeImage, config: PipelineConfig) -> np.ndarray:
    """Per-point flags for ri_to_cloud output: True where the pixel was
    created by upscaling (odd column/row origin)."""
    rows, cols = pixel_origins(ri)
    mask = cols % config.factor_x != 0
    if config.factor_y > 1:
        mask |= rows % config.factor_y != 0
    return mask


def run_scan(spec: str, config: PipelineConfig) -> tuple[dict, dict]:
    """Run the full pipeline on one input.

    Returns (report, artifacts); artifacts maps name -> RangeImage /
    (PointCloud, color) pairs for the writer. Raises StageError with the
    failing stage's name.
    """
    timings: dict[str, float] = {}

    def timed(stage, fn, *args):
        t0 = time.perf_counter()
        try:
            result = fn(*args)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
        timings[stage] = (time.perf_counter() - t0) * 1e3
        return result

    cloud = timed("ingest", load_scan, spec)
    cloud = timed("filter", filter_by_range, cloud, config.range_min, config.range_max)
    ref_ri = timed("project", cloud_to_ri, cloud, config.geometry)
    deg_ri = timed("degrade", degrade_ri, ref_ri, config)
    up_ri = timed("interp", upscale_ri, deg_ri, config)

    def reconstruct():
        ref_cloud = ri_to_cloud(ref_ri)
        test_ri = up_ri if up_ri is not None else deg_ri
        test_cloud = ri_to_cloud(test_ri)
        mask = interp_mask(test_ri, config) if up_ri is not None else None
        return ref_cloud, test_ri, test_cloud, mask

    ref_cloud, test_ri, test_cloud, mask = timed("reconstruct", reconstruct)

    def score():
        if up_ri is not None:
            ssim_ref = ref_ri
        else:
            # no upscale: compare at the degraded resolution against the
            # un-quantized decimation of the reference
            ssim_ref = downsample_ri(ref_ri, config.factor_x, config.factor_y)
        ssim_score = ssim(test_ri, ssim_ref)
        ref_tree = KdTree(ref_cloud)
        if mask is not None:
            interp_cloud = PointCloud(points=test_cloud.points[mask])
            ratio, densify = noise_ratio(interp_cloud, ref_cloud, config.delta, tree=ref_tree)
            n_interp = len(interp_cloud)
        else:
            ratio, densify, n_interp = None, 0, 0
        cd = chamfer(test_cloud, ref_cloud, tree_b=ref_tree)
        return QualityReport(ssim=ssim_score, noise_ratio=ratio, chamfer=cd,
                             densify_count=densify), n_interp

    quality, n_interp = timed("score", score)

    report = dict(config.echo())
    report["input"] = spec
    report.update(quality.as_dict())
    report["interp_points"] = n_interp
    report["ref_occupancy"] = occupancy(ref_ri)
    report["degraded_occupancy"] = occupancy(deg_ri)
    report["test_occupancy"] = occupancy(test_ri)
    report["points_in"] = len(cloud)
    report["points_out"] = len(test_cloud)
    for stage, ms in timings.items():
        report[f"time_{stage}_ms"] = ms

    artifacts = {
        "reference": ref_ri,
        "degraded": deg_ri,
        "upscaled": up_ri,
        "ref_cloud": (ref_cloud, None),
        "test_cloud": (test_cloud, mask),
    }
    return report, artifacts


def _scan_label(spec: str) -> str:
    if spec.startswith("synth:"):
        return f"synth_{spec.split(':', 1)[1]}"
    return Path(spec).stem


def write_artifacts(spec: str, artifacts: dict, out_dir: Path) -> None:
    """PGM views of every RI stage and PLY clouds with interpolated points
    colored for visual inspection."""
    label = _scan_label(spec)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in ("reference", "degraded", "upscaled"):
        ri = artifacts[name]
        if ri is not None:
            write_pgm(ri, out_dir / f"{label}_{name}.pgm")
    for name in ("ref_cloud", "test_cloud"):
        cloud, mask = artifacts[name]
        color = np.tile(np.array(SOURCE_COLOR, dtype=np.uint8), (len(cloud), 1))
        if mask is not None:
            color[mask] = INTERP_COLOR
        write_ply(cloud, out_dir / f"{label}_{name}.ply", color=color)


def run_pipeline(config: PipelineConfig) -> list[dict]:
    """Run every configured input; write reports and artifacts.

    A failing scan is reported on stderr with the failing stage and does
    not stop the other scans. Raises RuntimeError at the end if nothing
    succeeded or any scan failed.
    """
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    failures = []
    for spec in sorted(config.inputs):
        try:
            report, artifacts = run_scan(spec, config)
        except StageError as err:
            failures.append((spec, err))
            print(f"error: scan {spec}: {err}", file=sys.stderr)
            continue
        reports.append(report)
        if not config.no_artifacts:
            write_artifacts(spec, artifacts, out_dir)

    if config.report_format == "json":
        path = out_dir / "report.json"
        path.write_text(json.dumps(reports, indent=2) + "\n")
    else:
        write_csv(reports, out_dir / "report.csv")

    if failures:
        failed = ", ".join(spec for spec, _ in failures)
        raise RuntimeError(f"{len(failures)} scan(s) failed: {failed}")
    return reports


def write_csv(rows: list[dict], path: Path) -> None:
    """Append-friendly CSV: union of keys across rows, stable order."""
    if not rows:
        path.write_text("")
        return
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def sweep(config: PipelineConfig, grid: dict[str, list]) -> list[dict]:
    """Cartesian sweep over config fields; one row per scan x cell.

    Failures become rows with an 'error' column and the sweep continues.
    """
    for name in grid:
        if name not in {f.name for f in fields(config)}:
            raise ValueError(f"unknown config field in grid: {name!r}")
    rows = []
    names = list(grid)
    for values in itertools.product(*(grid[n] for n in names)):
        overrides = dict(zip(names, values))
        try:
            cell = replace(config, **overrides)
        except ValueError as err:
            # invalid cell: one error row per scan, sweep continues
            for spec in sorted(config.inputs):
                row = dict(config.echo())
                row.update(overrides)
                row["input"] = spec
                row["error"] = f"config: {err}"
                rows.append(row)
            continue
        for spec in sorted(cell.inputs):
            try:
                report, _ = run_scan(spec, cell)
                report["error"] = ""
            except StageError as err:
                report = dict(cell.echo())
                report["input"] = spec
                report["error"] = str(err)
            rows.append(report)
    return rows
