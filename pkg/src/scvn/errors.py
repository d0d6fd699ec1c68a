"""Exception hierarchy shared by the simulator and solver."""


class ScvnError(Exception):
    """Base class for all package errors."""


class ConfigError(ScvnError, ValueError):
    """Run configuration failed validation."""


class EmptyScenario(ScvnError):
    """The vehicle drop produced no (or too few) vehicles."""


class InvalidDistance(ScvnError, ValueError):
    pass


class InvalidRank(ScvnError, ValueError):
    pass


class InfeasiblePreference(ScvnError):
    """The preference threshold cannot be met within the storage capacity."""


class EmptyQueue(ScvnError):
    """Sender and receiver share no KB, so nothing enters the queue."""


class UnstableQueue(ScvnError):
    """Utilization of the pair queue is at or above one."""

    def __init__(self, utilization: float):
        super().__init__(f"queue unstable: utilization {utilization:.6g} >= 1")
        self.utilization = utilization


class InfeasiblePair(ScvnError):
    """No feasible joint KB construction exists for a vehicle pair."""


class InfeasiblePairing(ScvnError):
    """No perfect pairing exists on the finite-cost graph."""


class OracleTooLarge(ScvnError):
    pass


class NoFeasibleSolution(ScvnError):
    """Exhaustive search found no assignment satisfying every constraint."""
