"""
Exceptions raised by homfield. Each family carries the exit code used by the
command line driver.
"""

class HomfieldError(Exception):
    """ Base class for all homfield errors
    """
    exit_code = 3

    def to_dict(self):
        return {"error": self.__class__.__name__, "message": str(self)}

class UsageError(HomfieldError):
    """ Bad command line usage or option value
    """
    exit_code = 1

class ModelError(HomfieldError):
    """ Model file could not be read; carries the location of the offending token
    """
    exit_code = 2

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        if line:
            message = "%s at %d:%d" % (message, line, column)
        HomfieldError.__init__(self, message)

    def to_dict(self):
        doc = HomfieldError.to_dict(self)
        doc["line"] = self.line
        doc["column"] = self.column
        return doc

class ModelSyntaxError(ModelError):
    pass

class UndeclaredSymbol(ModelError):
    pass

class DuplicateDeclaration(ModelError):
    pass

class DerivationError(HomfieldError):
    """ Symbolic derivation failed
    """
    exit_code = 3

class CyclicBinding(DerivationError):
    pass

class UnboundSymbol(DerivationError):
    pass

class DomainError(DerivationError):
    """ Numeric evaluation outside the domain of a builtin (sqrt/ln of bad argument, division by zero)
    """
    pass

class OrderTooLow(DerivationError):
    pass

class JetOrderError(DerivationError):
    """ Expression uses jets beyond the supported order
    """
    pass

class InvalidConnection(DerivationError):
    pass

class LegendreError(DerivationError):
    pass

class DegenerateLegendre(LegendreError):
    """ Singular velocity Hessian: the system is constrained
    """
    pass

class UnsupportedLegendre(LegendreError):
    """ Momentum relations are not affine in the velocities
    """
    pass

class SingularMetric(DerivationError):
    pass

class OrderReductionError(DerivationError):
    pass

class NumericError(HomfieldError):
    """ Numerical integration failure
    """
    exit_code = 4

class NonFiniteState(NumericError):
    pass

class FixedPointDivergence(NumericError):
    pass

class EnergyDriftError(NumericError):
    pass

class NonIntegralSection(UserWarning):
    """ Gauge section is not an integral section of the supplied connection
    """
    pass
