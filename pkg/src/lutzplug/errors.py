"""Exception hierarchy for the lutzplug toolkit."""


class LutzError(Exception):
    """Base class for all toolkit errors."""


class OutOfRange(LutzError):
    """A radius or parameter fell outside the curve's interval."""


class ContactViolation(LutzError):
    """The profile data does not define a contact form.

    Carries a witness radius (and homotopy time, when relevant) where the
    wronskian fails to be negative.
    """

    def __init__(self, message: str, witness: float | None = None,
                 time: float | None = None):
        super().__init__(message)
        self.witness = witness
        self.time = time


class DegeneratePosition(LutzError):
    """The profile point sits at the origin, so no angle is defined."""


class NonRationalReebComponents(LutzError):
    """Slope looked rational but the Reeb components are not exactly rational."""


class NonMonotoneMap(LutzError):
    """A reparametrization map is not strictly monotone on its domain."""


class TooManyVertices(LutzError):
    """Vertex selection exceeded its cap before meeting the tolerance."""


class NoRoot(LutzError):
    """A bracketed root search found no sign change."""


class BudgetExceeded(LutzError):
    """An approximation step could not fit inside its volume budget."""


class NonRationalDirection(LutzError):
    """A linear piece's direction has no exact rational slope."""


class CertificationFailed(LutzError):
    """The approximation certificate check failed (period or volume drift)."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


class InvalidGeometry(LutzError):
    """Disc-map geometry parameters are out of their valid ranges."""


class BeadOverlap(InvalidGeometry):
    """Two beads (or a bead and a sector image) overlap."""


class BeadOutsideSector(InvalidGeometry):
    """A bead is not strictly inside the fundamental sector."""


class NotPositive(LutzError):
    """A primitive failed positivity; retry with a larger boundary value."""


class NoOrbitsFound(LutzError):
    """Periodic-orbit search produced nothing to take a minimum over."""


class InvalidNecklaceTopology(LutzError):
    """Bead layout is not one the necklace builder supports."""


class ContractViolation(LutzError):
    """A plug contract item failed.

    ``item`` is one of "boundary", "family", "action", "volume".
    """

    def __init__(self, message: str, item: str):
        super().__init__(message)
        self.item = item


class GeometryInfeasible(LutzError):
    """The requested embedded region cannot fit inside the chart."""


class NoConvergence(LutzError):
    """An iterative solve stalled before reaching its threshold."""


class ExactnessResidualTooLarge(LutzError):
    """A pullback failed its d(lambda) = area-form residual check."""


class InvalidTopology(LutzError):
    """A Morse extension precondition (clearance, census) failed."""


class PlugContractUnmet(LutzError):
    """Strict insertion demanded a plug bound the build could not meet."""


class EpsilonTooLarge(LutzError):
    """epsilon must stay below the minimal period entering the ledger."""


class SchemaError(LutzError):
    """A JSON document failed validation; message names the offending field."""
