"""Membership tests for N-, almost P-, P- and (minimally) semipositive
matrices, and finite certification of whole interval hulls of matrices."""

from hullcert.classes import ClassSpec, ClassVerdict, NCategory, Status
from hullcert.hull import Certificate, CertStatus, IntervalHull, certify, sample_validate
from hullcert.matcore import DEFAULT_TOL, Sign3, Tolerance

__all__ = [
    "CertStatus",
    "Certificate",
    "ClassSpec",
    "ClassVerdict",
    "DEFAULT_TOL",
    "IntervalHull",
    "NCategory",
    "Sign3",
    "Status",
    "Tolerance",
    "certify",
    "sample_validate",
]

__version__ = "0.1.0"
