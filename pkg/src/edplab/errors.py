"""Shared exception types.

The CLI maps these onto its exit-code contract: validation problems
(ValueError / HapRangeError) exit 2, InconclusiveError exits 3 and
CertificateRejection exits 4.
"""


class HapRangeError(ValueError):
    """A homogeneous AP reaches past the end of the sequence it is applied to."""


class InconclusiveError(RuntimeError):
    """An exhaustive computation hit its node/size cap before deciding.

    Deliberately distinct from a negative answer: callers must not treat
    "we gave up" as "false".
    """


class CertificateRejection(Exception):
    """A certificate failed verification; the message names the violated constraint."""
