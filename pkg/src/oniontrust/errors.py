"""Exception types shared across the package.

Everything raised deliberately derives from OnionTrustError so callers (and
the CLI) can catch one base class and turn it into a diagnostic.
"""


class OnionTrustError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(OnionTrustError):
    """A text input (graph, rule set, scenario) is malformed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


class UnknownEntityError(OnionTrustError):
    """An entity id was used that is not registered in the graph."""


class SelfLinkError(OnionTrustError):
    """A friendship link may not point from an entity to itself."""


class NoLinkError(OnionTrustError):
    """No link exists for the requested (source, target) pair."""


class FrozenGraphError(OnionTrustError):
    """The graph was frozen and a mutation was attempted."""


class GeneratorParamsError(OnionTrustError):
    """Graph generator parameters are out of range or inconsistent."""


class MissingAttributeError(OnionTrustError):
    """A link's attribute profile lacks something the rule set requires."""


class ZeroNormalizerError(OnionTrustError):
    """A quantitative attribute's per-network maximum is zero."""


class WeightSumError(OnionTrustError):
    """Quantitative attribute weights do not sum to one."""


class DomainError(OnionTrustError):
    """A numeric argument left its documented domain (e.g. not in [0, 1])."""


class UnknownRuleError(OnionTrustError):
    """A rule code in a rule set is not one of the defined rule families."""


class EmptyAssignmentError(OnionTrustError):
    """Defuzzification was asked to run with no qualitative assignments."""


class DisconnectedPathError(OnionTrustError):
    """A link sequence does not chain target-to-source."""


class CyclicPathError(OnionTrustError):
    """A link sequence visits some entity twice."""


class EmptyCandidateSetError(OnionTrustError):
    """Trust filtering left no router to pick from."""


class ZeroDenominatorError(OnionTrustError):
    """All selection weights are zero; probabilities are undefined."""


class InsufficientCandidatesError(OnionTrustError):
    """Fewer distinct candidates than the requested circuit length."""


class InfeasibleAssignmentError(OnionTrustError):
    """An adversary strategy cannot place as many routers as requested."""
