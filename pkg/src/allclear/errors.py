"""Exception types shared across the package.

The CLI maps these to exit codes: ConfigError -> 2, DataError -> 3,
NumericAbort -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration: unknown key, bad value, failed validation."""


class DataError(ValueError):
    """Missing or malformed input data: datasets, images, checkpoints."""


class ShapeError(DataError):
    """Array shape violates an operation's contract."""


class NumericAbort(RuntimeError):
    """Training hit a non-finite loss; carries enough state to replay."""

    def __init__(self, message, step=None, batch_seed=None):
        super().__init__(message)
        self.step = step
        self.batch_seed = batch_seed


class CheckpointError(DataError):
    """Base class for checkpoint file problems."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint was written with an unsupported format version."""


class CheckpointCorruptError(CheckpointError):
    """Checkpoint file is truncated or structurally invalid."""


class CheckpointMissingTensorError(CheckpointError):
    """Checkpoint lacks tensors the target model requires."""


class ConfigMismatchError(CheckpointError):
    """Checkpoint was produced under a different architecture config."""
