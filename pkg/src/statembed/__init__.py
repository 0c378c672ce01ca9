"""Numerical toolkit for statistical-manifold structure checks and embeddings
into flat statistical (Hessian) manifolds."""

from .affine import (
    AffineDecomposition,
    AffineImmersion,
    affine_to_lauritzen,
    check_statistical_affine,
    conormal_map,
    decompose,
)
from .ambient import (
    AmbientPotential,
    TubularChart,
    build_tube,
    extend_potential,
    induced_structure,
    normal_frame,
    pullback_potential,
)
from .bonnet import (
    BonnetResult,
    FrameField,
    bonnet_embed,
    dual_base_frame,
    parallel_frame,
    plaquette_holonomy,
    theta_form,
)
from .errors import (
    ChartError,
    FrameConditionError,
    InjectivityError,
    IntegrabilityError,
    NonFiniteError,
    NotClosedError,
    PathError,
    SingularMetricError,
    StatembedError,
    TransversalityError,
)
from .fixtures import FIXTURE_NAMES, Fixture, fixture
from .gcr import (
    BundleConnection,
    ExtrinsicData,
    GcrReport,
    bundle_connection,
    bundle_curvature,
    codazzi_hstar_dual_form,
    duality_residual,
    gcr_residuals,
)
from .grid import (
    Chart,
    Field,
    LatticePath,
    closedness_residual,
    partial,
    path_integrate,
    potential_from_closed_form,
    second_partial,
)
from .hessian import HessePotential, LegendreResult, hessian_metric, legendre_transform
from .lauritzen import (
    LauritzenPair,
    LauritzenReport,
    alpha_pair,
    dual_pair,
    verify_lauritzen,
)
from .structures import (
    CurvatureField,
    StatisticalStructure,
    StructureReport,
    alpha_connection,
    check_statistical,
    curvature,
    curvature_duality_residual,
    dual_connection,
    flatness_residual,
    levi_civita,
)

__version__ = "0.1.0"
