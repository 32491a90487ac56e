"""Exception types shared across the pipeline."""


class MwpipeError(Exception):
    """Base class for all pipeline errors."""


# -- bus ---------------------------------------------------------------------

class DuplicateTopic(MwpipeError):
    pass


class InvalidName(MwpipeError):
    pass


class UnknownTopic(MwpipeError):
    pass


class TimestampRegression(MwpipeError):
    pass


class SchemaMismatch(MwpipeError):
    pass


# -- synthesis ---------------------------------------------------------------

class InvalidProfile(MwpipeError):
    pass


class EmptySeries(MwpipeError):
    pass


class InvalidRate(MwpipeError):
    pass


class OverlapTooDense(MwpipeError):
    pass


class InvalidBase(MwpipeError):
    pass


class OverlappingEvents(MwpipeError):
    pass


# -- feature extraction ------------------------------------------------------

class WindowTooShort(MwpipeError):
    pass


class TooManyInvalidSamples(MwpipeError):
    pass


# -- simulation / session ----------------------------------------------------

class IncompleteTrace(MwpipeError):
    pass


class PlanInvalid(MwpipeError):
    pass


class ScaleOutOfRange(MwpipeError):
    pass


# -- bag i/o -----------------------------------------------------------------

class CorruptBag(MwpipeError):
    pass


class UnknownMagic(CorruptBag):
    pass
