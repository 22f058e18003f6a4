"""Exception types. Every error carries a short machine-readable ``code``."""


class SpectraError(Exception):
    code = "ERROR"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self):
        return f"{self.code}: {super().__str__()}"


class MediumError(SpectraError):
    """Invalid geometry or coefficient (NON_MONOTONE_SPEEDS, BAD_INTERFACE_ORDER, ...)."""


class OutOfDomain(SpectraError):
    code = "OUT_OF_DOMAIN"


class PoleProximity(SpectraError):
    code = "POLE_PROXIMITY"


class ScanResolutionExceeded(SpectraError):
    code = "SCAN_RESOLUTION_EXCEEDED"


class NotARoot(SpectraError):
    code = "NOT_A_ROOT"


class WrongZone(SpectraError):
    code = "WRONG_ZONE"


class EmptySweep(SpectraError):
    code = "EMPTY_SWEEP"


class ConvergenceFail(SpectraError):
    code = "CONVERGENCE_FAIL"


class QNonpositive(SpectraError):
    code = "Q_NONPOSITIVE"


class NonMonotoneProfile(SpectraError):
    code = "NON_MONOTONE_PROFILE"
