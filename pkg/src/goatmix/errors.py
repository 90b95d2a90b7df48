"""Exception hierarchy shared across the package."""


class GoatmixError(Exception):
    """Base class for all goatmix errors."""


class ConfigError(GoatmixError):
    """Invalid configuration: bad hyperparameter, unknown method, bad flags."""


class DataError(GoatmixError):
    """Invalid data: parse failures, schema violations, impossible splits."""


class SingleClassError(DataError):
    """A binary-classification operation received data with only one class."""
