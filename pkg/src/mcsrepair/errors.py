"""Exception hierarchy shared by every layer."""


class MCSError(Exception):
    """Base class for all errors raised by this package."""


class NoAcceptedBeliefSet(MCSError):
    """A context (or the whole system) has no accepted belief set."""


class LogicallyInconsistent(NoAcceptedBeliefSet):
    """The multi-context system has no equilibrium."""


class StratificationError(MCSError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("negation through a cycle: " + " -> ".join(map(str, self.cycle)))


class UnsafeRuleError(MCSError):
    pass


class OperationError(MCSError):
    """A management operation cannot be applied to a knowledge base."""


class InconsistentEquality(OperationError):
    pass


class InconsistentUpdateSet(MCSError):
    pass


class BoundExceeded(MCSError):
    pass


class InvalidAction(MCSError):
    """An update action names an operation its context does not offer."""
