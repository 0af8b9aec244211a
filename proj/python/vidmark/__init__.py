"""SVD video watermarking toolkit: embed, extract, attack, and measure."""

from ._vidmark import (
    Error,
    attack,
    derive_key,
    embed,
    extract,
    haar_forward,
    haar_inverse,
    prng_next,
    qim_embed,
    qim_extract,
    select_frames,
    singular_report,
    svd,
    two_norm,
    __version__,
)

__all__ = [
    "Error",
    "attack",
    "derive_key",
    "embed",
    "extract",
    "haar_forward",
    "haar_inverse",
    "prng_next",
    "qim_embed",
    "qim_extract",
    "select_frames",
    "singular_report",
    "svd",
    "two_norm",
    "__version__",
]
