"""Exception hierarchy. Every error the library raises derives from PeakVerifyError."""


class PeakVerifyError(Exception):
    pass


class InvalidAlignment(PeakVerifyError, ValueError):
    pass


class DomainMismatch(PeakVerifyError, ValueError):
    pass


class PremiseNotMet(PeakVerifyError):
    """A theorem-level operation was called outside its hypotheses.

    ``witness`` carries whatever object shows the premise failing (for
    example the intersecting alignment pair).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ArityError(PeakVerifyError, ValueError):
    pass


class IncompleteSCF(PeakVerifyError):
    pass


class SupportMismatch(PeakVerifyError, ValueError):
    pass


class ScaleExceeded(PeakVerifyError):
    pass


class InvalidMessage(PeakVerifyError, ValueError):
    pass
