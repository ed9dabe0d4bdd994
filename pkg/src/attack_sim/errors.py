"""Exception hierarchy shared by the simulator modules."""


class AttackSimError(Exception):
    """Base class for every error raised by attack_sim."""


class DomainError(AttackSimError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(AttackSimError, ValueError):
    """A scenario, table or experiment configuration is invalid."""


class OutOfCoverage(AttackSimError):
    """Bob's downlink SNR is below the lowest MCS threshold."""


class SignalBelowNoise(AttackSimError):
    """Received power does not exceed the receiver noise floor."""


class EmptyRegion(AttackSimError):
    """A modulation band maps to no area inside the cell."""


class SweepFailed(AttackSimError):
    """Every SNR measurement along a sweep circle was undetectable."""


class EstimationFailed(AttackSimError):
    """Direction-of-arrival estimation could not split signal and noise."""
