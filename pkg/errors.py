# errors.py - Exception hierarchy for rotor computations


class RotorError(Exception):
    """Base class for every error raised by the library"""


class DomainError(RotorError, ValueError):
    """Argument outside the mathematical domain of an operation"""


class CapacityError(RotorError):
    """Lookup table too small for the requested argument"""

    def __init__(self, requested, capacity):
        super().__init__(f"requested {requested} exceeds table capacity {capacity}")
        self.requested = requested
        self.capacity = capacity


class TruncationError(RotorError):
    """Tail tolerance not reachable below the l_max cap"""

    def __init__(self, message, l_max=None, residual=None):
        super().__init__(message)
        self.l_max = l_max
        self.residual = residual


class QuadratureError(RotorError):
    """Numerical projection lost more norm than the tolerance allows"""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class ValidationError(RotorError):
    """Run configuration rejected; carries every problem found"""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__('; '.join(self.errors) or 'invalid configuration')
