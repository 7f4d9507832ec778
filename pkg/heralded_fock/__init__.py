"""Heralded linear-optics generation of two-mode fixed photon number entangled states."""

from importlib import metadata as importlib_metadata


def get_version() -> str:
    """Get installed packaged version."""
    try:
        return importlib_metadata.version("heralded-fock")
    except importlib_metadata.PackageNotFoundError:
        return "unknown"


version: str = get_version()
