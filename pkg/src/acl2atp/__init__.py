"""Translate ACL2 world dumps to TPTP FOF, learn premise selection from
ACL2 proof dependencies, and benchmark first-order provers on the result."""

from importlib.resources import files

__version__ = "0.1.0"


def minicorpus_dir():
    """Directory of the bundled mini-corpus (manifest, world files, deps)."""
    return files(__name__) / "data" / "minicorpus"
