"""Exception hierarchy. Validation errors map to CLI exit code 2, the rest to 3."""


class WindbenchError(Exception):
    """Base class for all package errors."""


class ValidationError(WindbenchError):
    """Bad input data, configuration, or arguments."""


class FormatError(ValidationError):
    """Malformed on-disk file. Carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class DegenerateHullError(ValidationError):
    """Fewer than 3 points, or all points collinear."""


class ShapeInferenceError(ValidationError):
    """Irreconcilable tensor shapes in an architecture. Names the offending node."""

    def __init__(self, message: str, node: tuple[str, int] | None = None):
        if node is not None:
            message = f"{message} [node {node[0]}:{node[1]}]"
        super().__init__(message)
        self.node = node


class TrainingDiverged(WindbenchError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, learning_rate: float):
        super().__init__(
            f"training diverged: non-finite loss at epoch {epoch} "
            f"(learning_rate={learning_rate:g})"
        )
        self.epoch = epoch
        self.learning_rate = learning_rate


class SearchSpaceExhausted(WindbenchError):
    """Bounded retries failed to produce a valid architecture."""


class AuditError(WindbenchError):
    """A search log violates an invariant of the evolutionary algorithm."""
