"""Contact profile curves on the thickened torus, their certified
piecewise-linear rationalization, a desk-scale mapping-torus plug with an
invariant Morse function, and exact-arithmetic insertion ledgers that
certify arbitrarily large systolic-ratio lower bounds."""

from .curves import (
    BruteForceResult,
    ContactCertificate,
    ProfileCurve,
    RationalSlope,
    ReebVector,
    TorusPeriod,
    brute_force_min_period,
    check_contact,
    minimal_period_at,
    reeb_at,
    require_contact,
    volume_exact,
    wronskian,
)
from .discmap import DiscMap, RadialProfile, RotationAtom, fd_jacobian
from .errors import (
    BeadOutsideSector,
    BeadOverlap,
    CertificationFailed,
    ContactViolation,
    ContractViolation,
    EpsilonTooLarge,
    GeometryInfeasible,
    InvalidGeometry,
    InvalidNecklaceTopology,
    LutzError,
    NoOrbitsFound,
    PlugContractUnmet,
    SchemaError,
)
from .insertion import (
    AnnulusMorse,
    AnnulusMorseSpec,
    CertifiedBound,
    EllipseEmbedding,
    InsertionDemo,
    StarEmbedding,
    StraightPieceSummary,
    TubeAtlas,
    build_equal_area_embedding,
    certify_insertion,
    extend_annulus_morse,
    insert_plug,
    plan_parameters,
    pullback_primitive,
    verify_annulus_census,
    verify_embedding,
)
from .plug import (
    CriticalCensus,
    MorseNecklace,
    NecklaceSpec,
    PeriodicOrbitReport,
    Plug,
    PlugContractReport,
    PlugSpec,
    build_plug,
    find_periodic_points,
    min_action,
    verify_necklace_census,
    verify_plug_contract,
)
# the rationalize() entry point is intentionally not re-exported here: it
# would shadow the lutzplug.rationalize submodule attribute. Import it as
# `from lutzplug.rationalize import rationalize`.
from .rationalize import (
    ApproxBudget,
    CertificationReport,
    NormalizedPiece,
    RationalizationResult,
    convex_homotopy,
    normalize_linear_piece,
    snap_slope,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxBudget",
    "AnnulusMorse",
    "AnnulusMorseSpec",
    "BeadOutsideSector",
    "BeadOverlap",
    "BruteForceResult",
    "CertificationFailed",
    "CertificationReport",
    "CertifiedBound",
    "ContactCertificate",
    "ContactViolation",
    "ContractViolation",
    "CriticalCensus",
    "DiscMap",
    "EllipseEmbedding",
    "EpsilonTooLarge",
    "GeometryInfeasible",
    "InsertionDemo",
    "InvalidGeometry",
    "InvalidNecklaceTopology",
    "LutzError",
    "MorseNecklace",
    "NecklaceSpec",
    "NoOrbitsFound",
    "NormalizedPiece",
    "PeriodicOrbitReport",
    "Plug",
    "PlugContractReport",
    "PlugContractUnmet",
    "PlugSpec",
    "ProfileCurve",
    "RadialProfile",
    "RationalSlope",
    "RationalizationResult",
    "ReebVector",
    "RotationAtom",
    "SchemaError",
    "StarEmbedding",
    "StraightPieceSummary",
    "TorusPeriod",
    "TubeAtlas",
    "brute_force_min_period",
    "build_equal_area_embedding",
    "build_plug",
    "certify_insertion",
    "check_contact",
    "convex_homotopy",
    "extend_annulus_morse",
    "fd_jacobian",
    "find_periodic_points",
    "insert_plug",
    "min_action",
    "minimal_period_at",
    "normalize_linear_piece",
    "plan_parameters",
    "pullback_primitive",
    "reeb_at",
    "require_contact",
    "snap_slope",
    "verify_annulus_census",
    "verify_embedding",
    "verify_necklace_census",
    "verify_plug_contract",
    "volume_exact",
    "wronskian",
]
