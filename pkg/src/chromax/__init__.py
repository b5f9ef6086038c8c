"""Chromatic derivatives and expansions with point-varying weights for integral transforms."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from . import approx, chromatic, dyadic, kernels, orthopoly, quad, wavelet  # noqa: E402
from .errors import *  # noqa: E402,F401,F403

__all__ = ["approx", "chromatic", "dyadic", "kernels", "orthopoly", "quad", "wavelet"]
