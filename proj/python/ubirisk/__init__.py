"""Telematics claim-risk toolkit: python bindings over the C++ core."""

from ._core import *  # noqa: F401,F403
