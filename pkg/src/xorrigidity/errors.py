"""Exception hierarchy shared by every module."""


class XorRigidityError(Exception):
    """Base class for all toolkit errors."""


class DomainError(XorRigidityError, ValueError):
    pass


class ShapeError(XorRigidityError, ValueError):
    pass


class LabelError(XorRigidityError, KeyError):
    pass


class CapacityError(XorRigidityError):
    """A dense object would exceed the configured entry cap."""


class DegenerateInputError(XorRigidityError, ValueError):
    pass


class FeasibilityError(XorRigidityError):
    pass


class CertificateError(XorRigidityError):
    pass


class SingularOperatorError(XorRigidityError):
    pass


class DegenerateIntertwinerError(XorRigidityError):
    pass
