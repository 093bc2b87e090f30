"""Numerical and exact verification toolkit for Ricci-flat Kummer surfaces and their harmonic 2-forms."""

from importlib import resources

__version__ = "0.1.0"


def config_path(name: str):
    """Path of a shipped configuration, e.g. config_path("example1_z2")."""
    if not name.endswith(".cfg"):
        name += ".cfg"
    return resources.files(__name__) / "configs" / name
