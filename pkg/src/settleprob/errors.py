"""Exception types shared across the package."""


class SettleprobError(Exception):
    """Base class for all package-specific errors."""


class LengthMismatch(SettleprobError):
    pass


class MartingaleViolation(SettleprobError):
    """A slot-probability callback returned a value above the allowed ceiling."""


class ForkAxiomError(SettleprobError):
    """A labeled tree failed one of the four fork axioms.

    ``axiom`` is one of ``"F1".."F4"`` identifying the first violated axiom;
    ``vertices`` points at the offending vertex id(s).
    """

    def __init__(self, axiom: str, vertices, message: str):
        super().__init__(f"{axiom}: {message} (vertices {vertices})")
        self.axiom = axiom
        self.vertices = vertices


class UnknownTine(SettleprobError):
    pass


class TooLong(SettleprobError):
    """Input string exceeds the hard cap for exhaustive routines."""


class EnumerationOverflow(SettleprobError):
    """Closed-fork enumeration exceeded the configured cap."""


class NotClosed(SettleprobError):
    pass


class NotHonestSlot(SettleprobError):
    pass


class InsufficientReserve(SettleprobError):
    pass


class EmptySet(SettleprobError):
    """A witness was requested for an empty tine set."""


class WitnessMismatch(SettleprobError):
    """A designated witness pair does not realize the recursive margin value."""

    def __init__(self, split: int, message: str):
        super().__init__(f"split {split}: {message}")
        self.split = split


class InvalidAdversaryFork(SettleprobError):
    """An adversary callback returned a fork that is not a valid extension."""


class BadParams(SettleprobError):
    pass


class NonConvergent(SettleprobError):
    """A tail sum showed no sign of geometric decay."""


class ComposeConstantTerm(SettleprobError):
    """Series composition requires the inner series to vanish at zero."""


class BadGrid(SettleprobError):
    pass
