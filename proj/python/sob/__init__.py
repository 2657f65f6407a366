"""Stereo matching from one full left image plus a sparse fraction of the right."""

from ._sob import (
    SampleSet,
    decode_downsample,
    decode_hybrid,
    decode_sparse,
    deserialize,
    encode_downsample,
    encode_fps,
    encode_grid,
    gaussian_smooth,
    interpolate_samples,
    psnr,
    resize,
    serialize,
    set_max_threads,
    to_grayscale,
    warp,
    __version__,
)

__all__ = [
    "SampleSet",
    "decode_downsample",
    "decode_hybrid",
    "decode_sparse",
    "deserialize",
    "encode_downsample",
    "encode_fps",
    "encode_grid",
    "gaussian_smooth",
    "interpolate_samples",
    "psnr",
    "resize",
    "serialize",
    "set_max_threads",
    "to_grayscale",
    "warp",
    "__version__",
]
