"""Exception types raised by the toolkit."""


class PSRError(Exception):
    """Base class; the CLI turns these into structured error JSON."""

    code = "PSRError"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class DimensionMismatch(PSRError, ValueError):
    code = "DimensionMismatch"


class NotStandardForm(PSRError, ValueError):
    code = "NotStandardForm"

    def __init__(self, message, monomial=None, deviation=None):
        super().__init__(message)
        self.monomial = monomial
        self.deviation = deviation

    def to_dict(self):
        d = super().to_dict()
        d["monomial"] = self.monomial
        d["deviation"] = self.deviation
        return d


class NotHyperbolic(PSRError, ValueError):
    code = "NotHyperbolic"


class ChartError(PSRError, ValueError):
    code = "ChartError"


class SingularTransform(PSRError, ValueError):
    code = "SingularTransform"


class NoClosedHorizon(PSRError, ValueError):
    code = "NoClosedHorizon"


class ExtrapolationUnstable(PSRError, RuntimeError):
    code = "ExtrapolationUnstable"

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates

    def to_dict(self):
        d = super().to_dict()
        d["estimates"] = self.estimates
        return d


class NoCatalogMatch(PSRError, ValueError):
    code = "NoCatalogMatch"


class OutsideDomain(PSRError, ValueError):
    code = "OutsideDomain"


class NotConverged(PSRError, RuntimeError):
    code = "NotConverged"

    def __init__(self, message, curve=None):
        super().__init__(message)
        self.curve = curve

    def to_dict(self):
        d = super().to_dict()
        d["curve"] = self.curve
        return d


class ParseError(PSRError, ValueError):
    code = "ParseError"


class SchemaError(PSRError, ValueError):
    code = "SchemaError"
