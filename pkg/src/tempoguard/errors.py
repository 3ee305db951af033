"""Exception hierarchy shared by every engine layer.

Each class carries a stable ``code`` (the class name) so the HTTP gateway
can return machine-readable errors without string matching.
"""


class EngineError(Exception):
    """Base class for all engine errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- temporal networks -----------------------------------------------------

class MalformedNetwork(EngineError):
    """A link or contingent references an unknown point, or invariants fail."""


class InconsistentNetwork(EngineError):
    """Operation requires a consistent network but it has a negative cycle."""


class UnknownPoint(EngineError):
    pass


class ValueOutOfRange(EngineError):
    """Assignment value lies outside the point's feasible range."""


class IncompleteSituation(EngineError):
    pass


class DurationOutOfBounds(EngineError):
    pass


class InstanceTooLarge(EngineError):
    """Brute-force oracle precondition exceeded (size/bounds/grid)."""


# --- parsing and document validation ---------------------------------------

class ParseError(EngineError):
    """Malformed document text; ``location`` names the offending part."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{message} (at {location})" if location else message)
        self.location = location


class DuplicateTaskName(EngineError):
    pass


class NonPositiveDuration(EngineError):
    pass


class InvalidRange(EngineError):
    pass


class UnknownTaskInRelativeConstraint(EngineError):
    pass


class NonDescendingCalendars(EngineError):
    pass


class FirstTermNotAll(EngineError):
    pass


class EmptyWindow(EngineError):
    pass


class UnboundedWindow(EngineError):
    pass


# --- configuration ----------------------------------------------------------

class NoEnablingInterval(EngineError):
    pass


class AmbiguousInterval(EngineError):
    pass


class EmptyAuthorizedSet(EngineError):
    pass


# --- security rules ----------------------------------------------------------

class NotType2(EngineError):
    pass


class UnknownTask(EngineError):
    pass


class NotAParallelBlock(EngineError):
    pass


class UnsafeRuleSet(EngineError):
    pass


# --- execution ----------------------------------------------------------------

class ExecutionError(EngineError):
    """Base for step-level failures; never mutates the state it rejects."""


class NotEnabled(ExecutionError):
    pass


class UserNotAuthorized(ExecutionError):
    pass


class UserBlocked(ExecutionError):
    def __init__(self, message: str, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class TimeOutOfRange(ExecutionError):
    pass


class WrongOwner(ExecutionError):
    pass


class NotPending(ExecutionError):
    pass


class ViolationError(ExecutionError):
    """Unrecoverable timeline violations; scripted replays abort on these."""


class OutsideContingentWindow(ViolationError):
    pass


class DeadlineMissed(ViolationError):
    pass
