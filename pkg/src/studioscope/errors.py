"""Exception and warning hierarchy for the toolkit.

Errors fall into three families that the CLI maps onto stable exit codes:
usage errors (1), data errors (2) and numeric failures (3).  Non-fatal
conditions are reported through :mod:`warnings` with the categories below so
batch runs stay greppable (``WARN <class>: <detail>`` on stderr).
"""

from __future__ import annotations


class StudioscopeError(Exception):
    """Base class for all toolkit errors."""


class UsageError(StudioscopeError):
    """Bad command line, bad flag value, unreadable config."""

    exit_code = 1


class DataError(StudioscopeError):
    """Invalid or insufficient input data."""

    exit_code = 2


class NumericError(StudioscopeError):
    """A numeric procedure cannot produce a meaningful result."""

    exit_code = 3


# -- corpus ingestion ---------------------------------------------------------

class MissingColumn(DataError):
    """Input table does not match the documented corpus schema."""


class DuplicateTrackId(DataError):
    """Two rows share a track_id; corpora require unique ids."""


class EmptyCorpus(DataError):
    """No valid rows survived ingestion."""


class DegenerateColumn(NumericError):
    """A feature column is constant, so its z-score is undefined."""


class InsufficientData(DataError):
    """Too few rows / groups for the requested analysis."""


# -- audio decoding / feature extraction --------------------------------------

class UnsupportedFormat(DataError):
    """Audio file is not one of the supported lossless formats."""


class CorruptFile(DataError):
    """Audio file is truncated or structurally invalid."""


class NoBeat(NumericError):
    """No periodic onset pattern found (silence, pure ambient)."""


class TooShort(DataError):
    """Signal too short for the requested analysis."""


class MissingMetadata(DataError):
    """Metadata sidecar file is absent or unreadable."""


# -- statistics ----------------------------------------------------------------

class SingularDesign(NumericError):
    """Design matrix columns are collinear."""


class RankDeficientE(NumericError):
    """Residual SSCP matrix is singular; Wilks' lambda undefined."""


# -- machine learning -----------------------------------------------------------

class InvalidConfig(UsageError):
    """Configuration violates its invariants."""


class SingleClass(DataError):
    """Training labels contain only one class."""


class InsufficientClassSamples(DataError):
    """A class has too few samples for the requested cross-validation."""


# -- warning categories ----------------------------------------------------------

class ToolkitWarning(UserWarning):
    """Base class for non-fatal conditions."""


class UnparsableRowWarning(ToolkitWarning):
    """A corpus row was skipped during ingestion."""


class EmptyGroupWarning(ToolkitWarning):
    """A requested group contained no values."""


class SmallSampleWarning(ToolkitWarning):
    """Analysis skipped or unreliable due to small sample size."""


class MonoAudioWarning(ToolkitWarning):
    """Mono input was duplicated to both stereo channels."""


class ClippedSampleWarning(ToolkitWarning):
    """Samples outside [-1, 1] were clamped during analysis."""


class SmallMapWarning(ToolkitWarning):
    """Fewer training vectors than map units."""


class SparseCellWarning(ToolkitWarning):
    """A (nation, year) cell had fewer than two tracks and was omitted."""


class ExtractionFailureWarning(ToolkitWarning):
    """A track failed during batch extraction and was skipped."""
