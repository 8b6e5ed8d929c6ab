"""Semantic exception hierarchy.

Public operations never raise bare ValueError/KeyError for domain
failures; every contract violation gets a typed error so callers (and the
verification reports) can distinguish "undefined" from "wrong".
"""


class EquivarError(Exception):
    """Base class for all errors raised by this package."""


class StateSpaceTooLarge(EquivarError):
    """Joint/CPT enumeration would exceed the configured state cap."""


class ZeroProbabilityEvidence(EquivarError):
    """Observation conditions on an event of probability zero."""


class EmptySubset(EquivarError, ValueError):
    """Marginalization target is empty."""


class SystemMismatch(EquivarError, ValueError):
    """Distribution / translation / model variable systems do not line up."""


class AmbiguousTranslation(EquivarError):
    """A single-variable action does not determine its block's translated value."""


class UnknownSelectorValue(EquivarError, ValueError):
    """Mixture selector value has no component."""


class StructureInconsistent(EquivarError):
    """Declared concept DAG cannot represent the pushforward exactly."""


class DimensionMismatch(EquivarError, ValueError):
    """Input vector length does not match the model's input dimension."""


class EmptyCell(EquivarError):
    """Concept assignment never realized in the discretization dataset."""


class Divergence(EquivarError):
    """Training loss became non-finite."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class IndexOutOfRange(EquivarError, IndexError):
    """Concept/weight index outside the model's range."""


class ParseError(EquivarError, ValueError):
    """Scenario or config document is malformed; message names the field."""


class ValidationError(EquivarError, ValueError):
    """Aggregated scenario diagnostics."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


class UnknownScenario(EquivarError, ValueError):
    """No builtin or file scenario under that name."""


class UnknownVariable(EquivarError, ValueError):
    """Variable name does not resolve in the referenced system."""


class SessionClosed(EquivarError):
    """Round submitted to a closed forecasting session."""
