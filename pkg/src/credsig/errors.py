"""Exception hierarchy shared by every credsig module."""


class CredsigError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(CredsigError):
    """Unknown group profile, unregistered format id, bad bench config."""


class InvalidKeyError(CredsigError):
    pass


class DegenerateInputError(CredsigError):
    pass


class InconsistentOpeningsError(CredsigError):
    pass


class ThresholdTooSmallError(CredsigError):
    pass


class InsufficientSharesError(CredsigError):
    pass


class InvalidShareError(CredsigError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"share at index {index} fails the Feldman check")


class CanonicalizationError(CredsigError):
    pass


class TemplateError(CredsigError):
    pass


class ConstraintError(CredsigError):
    pass


class RedactionError(CredsigError):
    pass


class SigningError(CredsigError):
    pass


class ImmutabilityError(CredsigError):
    """Attempt to sanitize a block the signer did not mark admissible."""


class NothingToProveError(CredsigError):
    pass


class IssuanceError(CredsigError):
    pass


class GrantError(CredsigError):
    pass


class InvalidCredentialError(CredsigError):
    pass


class ProtocolError(CredsigError):
    """Illegal state transition in the multi-signature workflow."""


class EncodingError(CredsigError):
    """Malformed serialized envelope."""
