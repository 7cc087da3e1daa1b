"""Exception types shared across the package."""


class TplpError(Exception):
    """Base class for all errors raised by this package."""


class NonNormalConstraint(TplpError):
    """A temporal constraint still mentions a variable other than its principal one."""


class UniverseEmpty(TplpError):
    """A clause has object variables but the program declares no constants."""


class BaseTooLarge(TplpError):
    """The world space 2^|base| exceeds the configured atom cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(
            f"Herbrand base has {size} atoms, above the cap of {cap}; "
            f"try relevant grounding or raise the max-world-atoms limit"
        )
        self.size = size
        self.cap = cap


class AtomNotInBase(TplpError):
    """A formula mentions a ground atom outside the Herbrand base in use."""


class TimePointOutsideCalendar(TplpError):
    """A time point falls outside the program calendar."""


class InconsistentProgram(TplpError):
    """The operation requires a consistent program but none of its branches is feasible."""


class NonConvergence(TplpError):
    """The entropy maximizer hit its iteration cap before converging."""


class LPNumericalFailure(TplpError):
    """Float LP mode could not decide feasibility within its tolerances."""


class MissingTimeSlice(TplpError):
    """An evolution profile lacks an annotation for some formula/time pair."""
