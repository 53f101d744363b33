class RelCertError(Exception):
    """Base class for every error raised by RelCert."""


class GroupSpecSyntaxError(RelCertError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnsupportedGroupKindError(RelCertError, ValueError):
    pass


class NonReducingRuleError(RelCertError, ValueError):
    pass


class NonConfluentSystemError(RelCertError, ValueError):
    pass


class SpecMismatchError(RelCertError, ValueError):
    pass


class ResourceLimitError(RelCertError, RuntimeError):
    pass


class CosetSearchExhaustedError(RelCertError, RuntimeError):
    pass


class OutOfWindowError(RelCertError, LookupError):
    pass


class CertificateFormatError(RelCertError, ValueError):
    pass


class ConventionMismatchError(RelCertError, ValueError):
    pass


class EmptySupportError(RelCertError, ValueError):
    pass


class RankingError(RelCertError, ValueError):
    pass


class EquivarianceError(RelCertError, ValueError):
    pass


class FiniteSpaceError(RelCertError, ValueError):
    pass


class InvariantBreachError(RelCertError, AssertionError):
    pass


class ScenarioError(RelCertError, ValueError):
    pass
