"""Exception hierarchy shared by all wordadj modules."""


class WordAdjError(Exception):
    """Base class; the CLI maps any subclass to a machine-readable error."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "type": type(self).__name__, "message": str(self)}


class CorpusIOError(WordAdjError, OSError):
    code = "io"


class EncodingError(WordAdjError, ValueError):
    code = "encoding"


class ManifestParseError(WordAdjError, ValueError):
    code = "parse"


class DuplicateIdError(WordAdjError, ValueError):
    code = "duplicate_id"


class SegmentationError(WordAdjError, ValueError):
    code = "segmentation"


class EmptyStreamError(WordAdjError, ValueError):
    code = "empty_stream"


class VocabularyExhaustedError(WordAdjError, ValueError):
    code = "vocabulary_exhausted"


class DisconnectedError(WordAdjError, ValueError):
    code = "disconnected"


class InsufficientTailError(WordAdjError, ValueError):
    code = "insufficient_tail"


class TooSmallVocabularyError(WordAdjError, ValueError):
    code = "too_small_vocabulary"


class EmptyGroupError(WordAdjError, ValueError):
    code = "empty_group"


class PoleError(WordAdjError, ArithmeticError):
    code = "pole"


class FitDivergedError(WordAdjError, RuntimeError):
    """Raised when no start converges; ``best`` holds the best-effort params."""

    code = "fit_diverged"

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SaturationError(WordAdjError, RuntimeError):
    code = "saturation"


class ConfigError(WordAdjError, ValueError):
    code = "config"


class CurveTooShortError(WordAdjError, ValueError):
    code = "curve_too_short"
