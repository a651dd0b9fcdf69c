"""Sperm morphology measurement: centerline-based tail metrics, head and
midpiece fits, and parsing-quality metrics."""

from ._core import (
    Error,
    InvalidArgument,
    IoError,
    candidate_pixels,
    config_entries,
    cos_alpha,
    derivative_fields,
    evaluate_parsing,
    fit_ellipse,
    fit_rectangle,
    gaussian_kernel,
    head_midpiece_angle,
    load_image,
    load_mask,
    measure,
    momentum_update,
    part_code_table,
    render_phantom,
    run_cli,
    save_image,
    save_mask,
    trace_tail,
)

PART_CODES = {"background": 0, "acrosome": 1, "vacuole": 2, "nucleus": 3, "midpiece": 4, "tail": 5}

__all__ = [
    "Error",
    "InvalidArgument",
    "IoError",
    "PART_CODES",
    "candidate_pixels",
    "config_entries",
    "cos_alpha",
    "derivative_fields",
    "evaluate_parsing",
    "fit_ellipse",
    "fit_rectangle",
    "gaussian_kernel",
    "head_midpiece_angle",
    "load_image",
    "load_mask",
    "measure",
    "momentum_update",
    "part_code_table",
    "render_phantom",
    "run_cli",
    "save_image",
    "save_mask",
    "trace_tail",
]
