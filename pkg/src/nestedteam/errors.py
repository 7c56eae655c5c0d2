"""Exception types shared across the solver."""

from __future__ import annotations


class TeamModelError(ValueError):
    """Base class for problems with a model document or instance."""


class ParseError(TeamModelError):
    """The model document is malformed (bad JSON, unknown keys or labels)."""


class ValidationError(TeamModelError):
    """A model violates one of its invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        first = self.violations[0] if self.violations else "invalid model"
        super().__init__(str(first))


class NullEventError(ValueError):
    """Conditioning on an event of probability zero."""


class InconsistentObservationError(NullEventError):
    """A belief update received observations the model assigns zero probability."""


class IncompletePrescriptionError(KeyError):
    """A prescription was applied to a belief outside its domain."""


class ResourceBoundError(RuntimeError):
    """A configured enumeration bound was exceeded."""

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            detail = ", ".join(f"{k}={v}" for k, v in diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)


class MissingEntryError(KeyError):
    """A strategy table has no entry for a positive-probability memory node."""


class InconsistentTrajectoryError(NullEventError):
    """A trajectory fed to a policy executor has zero probability under the model."""
