"""webrank: exact analysis of holomorphic webs of arbitrary codimension.

Builds the jet linear systems of a d-web of codimension q, decides (strong)
p-ordinarity, computes the rank bounds pi0 / pi', verifies (closed) abelian
relations, and computes the tautological connection and its curvature for
calibrated ordinary webs.
"""

from importlib import resources

__version__ = "0.1.0"


def data_path(name: str):
    """Path to a bundled example web/relation file."""
    return resources.files("webrank").joinpath("data", name)
