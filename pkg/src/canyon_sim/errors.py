"""Exception types shared across the simulator."""


class DomainError(ValueError):
    """An input lies outside the domain of a model formula."""


class RegionFormatError(ValueError):
    """A region file failed to parse or validate."""


class TableEvaluationError(ValueError):
    """A small-scale parameter function evaluated to an invalid scale."""


class ConfigError(ValueError):
    """A configuration document is missing fields or holds invalid values."""


class GenerationError(RuntimeError):
    """A channel drop could not be generated.

    Carries the ``(master_seed, drop_index)`` pair that failed so the drop
    can be regenerated in isolation.
    """

    def __init__(self, message, seed_record=None):
        super().__init__(message)
        self.seed_record = seed_record
