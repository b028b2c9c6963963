"""Numerical Finsler geometry: Taylor-jet curvature of Randers metrics and identity checks."""

from .catalog import (
    CatalogEntry,
    OneForm,
    RandersMetric,
    RiemannianMetric,
    beta_norm,
    build_catalog_entry,
    build_space_form,
    entry_from_spec,
)
from .geometry import (
    LocalGeometry,
    PointState,
    curvature_report,
    flag_curvature,
    fundamental_tensor,
    riemann,
    scalar_curvature,
    spray,
)
from .jets import Jet, partial, seed
from .nonriemannian import (
    ScalarField,
    cartan,
    distortion,
    distortion_quadrature,
    horizontal_derivative,
    mean_landsberg,
    s_curvature_tau,
)
from .randers import christoffel, covariant_derivatives, s_curvature_randers
from .verify import IdentityResult, run_suite

__version__ = "0.1.0"
