class CalculusError(Exception):
    """Base class for errors raised by the calculus."""


class UnifyError(CalculusError):
    """Unification failed (constructor clash or occurs check).

    For a partial term this means no way of filling its holes yields a proof.
    """


class UnboundVariableError(CalculusError):
    pass


class IllTypedError(CalculusError):
    pass


class NoSuchHoleError(CalculusError, KeyError):
    pass


class BadPathError(CalculusError):
    pass


class HoleAtPathError(CalculusError):
    pass
