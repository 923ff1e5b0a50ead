class WavefrontError(Exception):
    """Base class for errors raised by this package."""


class DomainError(WavefrontError):
    """A state left the admissible ball of the model."""


class ContractError(WavefrontError, ValueError):
    """A precondition of an operation was violated by the caller."""


class ModelAdmissibilityError(WavefrontError):
    """The model breaks a structural hypothesis (e.g. Lax inequalities)."""


class AdmissibilityError(WavefrontError):
    """The approximate solution left the ball where Riemann problems are solvable."""

    def __init__(self, msg: str, time: float | None = None, position: float | None = None):
        super().__init__(msg)
        self.time = time
        self.position = position


class EngineInvariantError(WavefrontError):
    """Internal invariant of the front tracking loop broken."""


class ConfigError(WavefrontError, ValueError):
    """Invalid run configuration; ``errors`` lists one message per field."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors
