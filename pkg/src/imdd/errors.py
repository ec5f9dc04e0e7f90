"""Exception types shared across the package."""


class DomainError(ValueError):
    """Invalid parameter or configuration (bad pulse spec, constellation, ...)."""


class UnsupportedError(DomainError):
    """Operation not defined for this input (e.g. non-PAM analytic SER)."""


class NumericalDivergenceError(RuntimeError):
    """A truncated series/lattice sum cannot meet its tolerance within the
    hard term cap.  In practice this signals a roll-off too close to zero
    for the requested accuracy."""
