"""Exception types shared across the pipeline."""


class KoopmonError(Exception):
    """Base class for pipeline failures."""


class IngestError(KoopmonError):
    """Unreadable, empty, or malformed input data."""


class FormatError(KoopmonError):
    """On-disk artifact has the wrong format or version."""


class DegenerateDataError(KoopmonError):
    """Data too sparse or too uniform to fit the requested statistic."""
