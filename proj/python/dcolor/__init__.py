"""Example-based colorization of grayscale images."""

from ._dcolor import (
    DimensionMismatch,
    Error,
    FormatError,
    InvalidArgument,
    IoError,
    Model,
    TrainingDiverged,
    categories,
    evaluate,
    gist,
    joint_bilateral,
    psnr,
    rgb_to_yuv,
    set_threads,
    synthetic_scene,
    train,
    write_synthetic_dataset,
    yuv_to_rgb,
)

__all__ = [
    "DimensionMismatch",
    "Error",
    "FormatError",
    "InvalidArgument",
    "IoError",
    "Model",
    "TrainingDiverged",
    "categories",
    "evaluate",
    "gist",
    "joint_bilateral",
    "psnr",
    "rgb_to_yuv",
    "set_threads",
    "synthetic_scene",
    "train",
    "write_synthetic_dataset",
    "yuv_to_rgb",
]
