class PhishcampError(Exception):
    """
    Base class for every error raised by phishcamp.
    """


class InputError(PhishcampError):
    """
    The input data or the parameters are unusable.
    """


class InvariantViolation(PhishcampError):
    """
    An internal invariant does not hold.
    """


class IncorrectParameters(InputError):
    """
    Incorrect parameters were passed here.
    """


class ValueNotSupported(InputError):
    """
    Not a supported Value.
    """


class ParseError(InputError):
    """
    A dataset line could not be parsed.
    """
    def __init__(self, message, line_number=None):
        super(ParseError, self).__init__(message)
        self.line_number = line_number


class DuplicateUrl(InputError):
    """
    The same url appears twice in one dataset.
    """


class MissingRequiredField(InputError):
    """
    A record lacks ``url`` or ``submission_time``.
    """


class InvalidSpec(InputError):
    """
    The synthetic dataset spec is not usable.
    """


class DatasetMismatch(InputError):
    """
    Two runs that are compared did not cover the same URLs.
    """


class EnrichmentUnavailable(PhishcampError):
    """
    The enrichment source cannot answer for this URL.
    """


class EmptyCorpus(InvariantViolation):
    """
    A TF-IDF model was requested over zero documents.
    """


class DimensionMismatch(InvariantViolation):
    """
    Two vectors come from different TF-IDF models.
    """


class PartitionViolation(InvariantViolation):
    """
    Components overlap or do not cover the graph.
    """


class UnknownLabel(InvariantViolation):
    """
    A campaign label does not occur in the label list.
    """


class CoverageMismatch(InvariantViolation):
    """
    The two clustering layers do not cover the same URLs.
    """


class TooFewCampaigns(InvariantViolation):
    """
    A coherence map needs at least two campaigns.
    """


class StageError(PhishcampError):
    """
    An error escaped a pipeline stage.
    """
    def __init__(self, stage, error):
        super(StageError, self).__init__('[%s] %s' % (stage, error))
        self.stage = stage
        self.error = error
