"""Exception types raised across the simulator."""


class FaasLabError(Exception):
    """Base class for all simulator errors."""


class SchedulingInPast(FaasLabError):
    """An event was scheduled at a time earlier than the current clock."""


class InvalidConfig(FaasLabError):
    """A configuration value violates an invariant."""


class InvalidSpec(InvalidConfig):
    """A workload spec value violates an invariant (e.g. rate <= 0)."""


class UnknownScenario(FaasLabError):
    """Requested scenario name is not bundled."""


class UnknownFunctionType(FaasLabError):
    """Request refers to a function type with no configured execution profile."""


class DuplicateEnqueue(FaasLabError):
    """A request was enqueued while already queued or terminal."""


class InstanceLimitReached(FaasLabError):
    """Scale-up refused: per-type instance limit hit."""


class NodeLimitReached(FaasLabError):
    """Node provisioning refused: node limit hit."""


class NoCapacity(FaasLabError):
    """No feasible node and the node limit prevents provisioning another."""


class InvalidTransition(FaasLabError):
    """Illegal instance or node state-machine transition."""


class ConcurrencyExceeded(FaasLabError):
    """An assignment targeted an instance with no free concurrency slot."""


class UnknownRequest(FaasLabError):
    """Operation referenced a request not known to the target entity."""


class UnderflowViolation(FaasLabError):
    """Resource release would drive node usage negative."""


class UnknownNode(FaasLabError):
    """Operation referenced a node id that does not exist."""


class NodeNotActive(FaasLabError):
    """Fault injection targeted a node that is not in the Active state."""


class UnknownCommand(FaasLabError):
    """Control command kind is not recognised."""
