"""Lossy Gaussian boson sampling: exact small-scale simulation and loss mitigation by post-selection."""
from .fock import *  # noqa: F401,F403
from .linear_optics import *  # noqa: F401,F403
from .loss import *  # noqa: F401,F403
from .postselection import *  # noqa: F401,F403
from .nonclassicality import *  # noqa: F401,F403

__version__ = "0.1.0"
