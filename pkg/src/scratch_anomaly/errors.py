class AnomalyError(Exception):
    """Base class for all errors raised by this package."""


class UnreadableFile(AnomalyError):
    pass


class MalformedProject(AnomalyError):
    pass


class EmptyCorpus(AnomalyError):
    pass


class NoScripts(AnomalyError):
    pass
