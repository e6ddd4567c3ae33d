"""Exception hierarchy shared by every layer of the toolkit."""


class SPPAError(Exception):
    """Base class for all toolkit errors"""


class ContractViolation(SPPAError, ValueError):
    """A precondition of an operation was not met"""


class UnsupportedSpaceError(ContractViolation):
    """The operation needs linear structure the given space does not have"""


class ScheduleError(ContractViolation):
    """
    A step schedule breaks one of the series conditions.

    Attributes:
        condition (str): "divergent_sum", "square_summable",
            "positive_scale" or "offset"
    """

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


class DegenerateMedianError(SPPAError, ValueError):
    """The weighted median is an interval rather than a single point"""


class InstanceBuildError(SPPAError):
    """A problem instance could not be built from its config"""


class ConfigError(SPPAError):
    """An experiment config could not be read or validated"""


class OutputError(SPPAError):
    """A result file or directory could not be written"""
