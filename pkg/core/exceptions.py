"""
Exception hierarchy shared by every app.

Management commands turn any UnderlapError into a CommandError; library
callers can catch the specific subclasses.
"""


class UnderlapError(Exception):
    """Base class for all errors raised by the underlap apps"""


class ShapeError(UnderlapError, ValueError):
    """Support signatures, dimensions or row counts do not match"""


class ArgumentError(UnderlapError, ValueError):
    """An argument is outside its documented domain"""


class CapacityError(UnderlapError):
    """A brute-force computation would exceed its size guard"""


class PreconditionError(UnderlapError):
    """A documented precondition does not hold for the given input"""


class NumericError(UnderlapError):
    """A matrix is not positive definite or an oracle failed its self-check"""


class DatasetError(UnderlapError):
    """A CSV file could not be turned into a typed dataset"""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class UndersizeClusterError(UnderlapError):
    """A cluster has too few members for a per-cluster density fit"""

    def __init__(self, cluster, size, minimum):
        super().__init__(
            f"Cluster {cluster} has {size} members; at least {minimum} are "
            f"needed to fit its covariate density"
        )
        self.cluster = cluster
        self.size = size
        self.minimum = minimum


class PipelineStageError(UnderlapError):
    """Wraps a failure with the name of the pipeline stage that raised it"""

    def __init__(self, stage, error):
        super().__init__(f"[{stage}] {error}")
        self.stage = stage
        self.error = error
