"""Exception hierarchy.

Every domain error carries a short ``code`` (e.g. ``"duplicate-label"``)
that the command line reports verbatim.
"""


class HyperstructureError(Exception):
    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class DuplicateLabel(HyperstructureError):
    code = "duplicate-label"


class UnknownElement(HyperstructureError):
    code = "unknown-element"


class UnknownBond(HyperstructureError):
    code = "unknown-bond"


class LevelMismatch(HyperstructureError):
    code = "level-mismatch"


class BadLevel(HyperstructureError):
    code = "bad-level"


class EmptyBoundary(HyperstructureError):
    code = "empty-boundary"


class StateNotAssigned(HyperstructureError):
    code = "state-not-assigned"


class BoundaryMismatch(HyperstructureError):
    code = "boundary-mismatch"


class AmbiguousLabel(HyperstructureError):
    code = "ambiguous-label"


class InvalidHyperstructure(HyperstructureError):
    """Raised when a loaded structure fails validation."""

    code = "invalid-hyperstructure"

    def __init__(self, report):
        self.report = report
        super().__init__(f"{len(report)} violation(s): " + "; ".join(str(v) for v in report))


class FormatError(HyperstructureError):
    code = "bad-format"


class MalformedChain(HyperstructureError):
    code = "malformed-chain"


class MalformedTree(HyperstructureError):
    code = "malformed-tree"


class RepresentationMismatch(HyperstructureError):
    code = "representation-mismatch"


class UnknownLabel(HyperstructureError):
    code = "unknown-label"


class BadSignature(HyperstructureError):
    code = "bad-signature"


class MissingBaseState(HyperstructureError):
    code = "missing-base-state"


class AggregatorGap(HyperstructureError):
    code = "aggregator-gap"


class SpaceMismatch(HyperstructureError):
    code = "space-mismatch"


class StalePrior(HyperstructureError):
    code = "stale-prior"


class LengthMismatch(HyperstructureError):
    code = "length-mismatch"


class ZeroVariance(HyperstructureError):
    code = "zero-variance"
