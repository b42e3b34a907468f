"""Exception taxonomy for the diacritization pipeline.

Every failure the library raises on purpose derives from TashkeelError so
callers (and the CLI) can separate expected data problems from bugs.
"""


class TashkeelError(Exception):
    """Base class for all expected pipeline failures."""


# --- diacritic algebra -------------------------------------------------------

class AlignmentFailure(TashkeelError):
    """A word's letter/mark structure cannot be aligned into classes."""


class MarkBeforeLetter(AlignmentFailure):
    """A diacritic mark appears with no Arabic letter to attach to."""


class UnsupportedMarkCluster(AlignmentFailure):
    """A mark combination outside the supported class set (or a combining
    mark such as superscript alef that is not one of the eight marks)."""


class EmptyWord(AlignmentFailure):
    """A word contains no Arabic letter."""


# --- corpus ------------------------------------------------------------------

class IoFailure(TashkeelError):
    """A file could not be read or written."""


class InvalidEncoding(TashkeelError):
    """Input bytes are not valid UTF-8."""


class UnsplittableSegment(TashkeelError):
    """A sentence exceeds the token limit and has no split candidate."""


class EmptyCorpus(TashkeelError):
    """An operation that needs sentences received none."""


# --- encoding ----------------------------------------------------------------

class EmptySentence(TashkeelError):
    """A sentence has no words after whitespace splitting."""


class SequenceTooLong(TashkeelError):
    """An encoded sequence exceeds the model's maximum length."""


class SpanMismatch(TashkeelError):
    """Labels, spans, and words disagree during decoding."""


# --- task generation ---------------------------------------------------------

class EmptyInput(TashkeelError):
    """A task formatter received an empty sentence or pair list."""


class MalformedRecord(TashkeelError):
    """A task input file has a structurally invalid line."""


# --- model / training --------------------------------------------------------

class InvalidConfig(TashkeelError):
    """A model configuration violates a structural invariant."""


class ShapeMismatch(TashkeelError):
    """Logits and labels disagree in shape."""


class DivergenceDetected(TashkeelError):
    """A loss or gradient became NaN or infinite."""


class GradientMismatch(TashkeelError):
    """Analytic gradients disagree with finite differences."""


class InvalidSchedule(TashkeelError):
    """A training schedule has a non-positive epoch or batch size."""


# --- checkpoint --------------------------------------------------------------

class CorruptCheckpoint(TashkeelError):
    """Checkpoint bytes fail magic, length, or structure validation."""


class VersionMismatch(TashkeelError):
    """Checkpoint format version is not supported by this reader."""


class VocabularyMismatch(TashkeelError):
    """A checkpoint was trained against a different vocabulary file."""


# --- inference ---------------------------------------------------------------

class UnsplittableWord(TashkeelError):
    """A single word alone exceeds the window token limit."""


class InvalidStep(TashkeelError):
    """A sliding-window step is not a positive integer."""


# --- metrics -----------------------------------------------------------------

class BaseTextMismatch(TashkeelError):
    """Gold and prediction differ after removing diacritics."""


class InvalidEdges(TashkeelError):
    """Bucket edges are not strictly increasing from zero."""
