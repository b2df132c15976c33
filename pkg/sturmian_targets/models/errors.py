"""Exception hierarchy shared by every layer; `code` is what the CLI prints."""


class SturmianError(Exception):
    code = "error"


class DomainError(SturmianError, ValueError):
    code = "domain"


class HorizonError(DomainError):
    """An orbit time or convergent index lies beyond what the rational proxy reproduces."""
    code = "horizon"


class ConfigError(SturmianError, ValueError):
    code = "config"


class SamplingError(SturmianError):
    code = "sampling"


class VerificationError(SturmianError, AssertionError):
    code = "verification"
