"""Exact truncated computations of prismatic envelopes, Nygaard filtrations
and syntomic cohomology for Breuil-Kisin prisms over Z_p[[z]]."""

__version__ = "0.1.0"

from .delta_prism import make_breuil_kisin
from .envelope import EnvelopeBounds, build_envelope, certify_envelope, make_presentation
from .syntomic import SyntomicResult, syntomic

__all__ = [
    "EnvelopeBounds",
    "SyntomicResult",
    "build_envelope",
    "certify_envelope",
    "make_breuil_kisin",
    "make_presentation",
    "syntomic",
]
