"""Exception hierarchy shared by the core modules"""


class KDError(Exception):
    """Base class for pipeline errors"""


class DomainError(KDError):
    """Numeric argument outside the domain of an operation"""


class EvaluationError(KDError):
    """A closed-form intermediate took an invalid value"""

    def __init__(self, intermediate: str, message: str):
        super().__init__(f"{intermediate}: {message}")
        self.intermediate = intermediate


class ConfigurationError(KDError):
    """Invalid configuration detected before or during compute"""


class ContextEmptyError(KDError):
    """An output context carries no membership mass"""


class DegenerateClusterError(KDError):
    """A cluster has zero total support weight"""


class AssemblyError(KDError):
    """Landmark assembly received an inconsistent granule count"""


class DivergenceError(KDError):
    """Training produced a non-finite loss"""

    def __init__(self, epoch: int, message: str = "non-finite loss"):
        super().__init__(f"{message} at epoch {epoch}")
        self.epoch = epoch


class UndefinedRelativeError(KDError):
    """Relative improvement requested against a zero baseline"""


class MissingArtifactError(KDError):
    """An upstream artifact is absent from the run directory"""

    def __init__(self, path: str, subcommand: str):
        super().__init__(f"missing {path}; run `{subcommand}` first")
        self.path = path
        self.subcommand = subcommand
