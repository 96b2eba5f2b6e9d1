"""Exception hierarchy shared across the package."""


class TrajBenchError(Exception):
    """Base class for all trajbench errors."""


class InvalidParams(TrajBenchError):
    """A parameter violates its documented range or combination rules."""


class DegenerateDataset(TrajBenchError):
    """The dataset is too small for the requested computation."""


class SampleTooLarge(TrajBenchError):
    """Requested sample size exceeds the population size."""


class NoValidNeighbor(TrajBenchError):
    """A point has no neighbor owned by a different trajectory."""


class DegenerateExtent(TrajBenchError):
    """The dataset bounding box has zero area."""


class DuplicateTrajectory(TrajBenchError):
    """A trajectory id is already present in the store."""


class NotFound(TrajBenchError):
    """A trajectory id is not present in the store."""


class InsufficientData(TrajBenchError):
    """The store does not hold enough trajectories for the query."""


class UnsatisfiableWorkload(TrajBenchError):
    """Rejection sampling exhausted its budget without a valid config."""


class EmptyGroup(TrajBenchError):
    """A summary was requested over an empty record group."""


class InsufficientPoints(TrajBenchError):
    """Too few data points for a correlation."""


class MalformedInput(TrajBenchError):
    """An input file violates the trajectory CSV schema."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
