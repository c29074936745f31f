"""Exception hierarchy.

Each subclass carries the CLI exit code it maps to, so the command layer can
translate failures without a lookup table.
"""


class NlglrtError(Exception):
    exit_code = 1


class InvalidConfig(NlglrtError, ValueError):
    exit_code = 2


class NotPositiveDefinite(NlglrtError, ArithmeticError):
    exit_code = 5


class NonSquare(NlglrtError, ValueError):
    pass


class DimensionMismatch(NlglrtError, ValueError):
    pass


class ShapeMismatch(NlglrtError, ValueError):
    pass


class WindowTooLarge(NlglrtError, ValueError):
    exit_code = 5


class EmptyInput(NlglrtError, ValueError):
    pass


class NonFiniteLoss(NlglrtError, ArithmeticError):
    exit_code = 3


class OnsetOutOfRange(NlglrtError, ValueError):
    exit_code = 5


class DegenerateLabels(NlglrtError, ValueError):
    exit_code = 5


class InsufficientSamples(NlglrtError, ValueError):
    """Edited stream too short for two windows; ``seed`` names the trial."""

    exit_code = 5

    def __init__(self, message, seed=None):
        super().__init__(message)
        self.seed = seed


class MissingArtifact(NlglrtError, FileNotFoundError):
    exit_code = 4
