"""spinx: quantum scattering engine for alkali / noble-gas spin exchange."""

__version__ = "0.1.0"

from spinx import units  # noqa: F401
