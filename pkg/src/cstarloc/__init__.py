"""Localization of finite-dimensional Hilbert C*-modules at states, with separation witnesses.

The algebra is a finite direct sum of full matrix algebras; modules are
the standard ones A^n.  Everything is exact linear algebra up to stated
tolerances, so each property comes with a residual.
"""

from .algebra import AlgebraElement, CStarAlgebra, adjoint, algebra_new, is_positive, mul, operator_norm
from .errors import (
    CStarLocError,
    DegenerateInput,
    InvalidArgument,
    InvalidFunctional,
    NoSeparation,
    PositivityError,
    SearchInconclusive,
    ShapeError,
    UnsupportedRule,
)
from .instances import InstanceSpec, c2_example, generate_instance
from .localization import (
    CheckResult,
    LocalizedSpace,
    comparison_map,
    direct_sum_embedding,
    gns_tensor_localization,
    localize,
    null_space,
)
from .module import (
    HilbertModule,
    ModuleElement,
    Submodule,
    linear_span,
    module_inner,
    orthogonal_complement,
    riesz_representation,
    standard_module,
    submodule_from_generators,
)
from .separation import (
    SeparationWitness,
    find_separating_vector_state,
    hahn_banach_witness,
    separating_state_faithful,
    separation_certificate,
)
from .states import (
    ConvexDecomposition,
    GeometricRule,
    PositiveFunctional,
    convex_combine,
    decompose_into_vector_states,
    functional_from_density,
    gns,
    sigma_convex_truncate,
    trace_state,
    vector_state,
)
from .suites import CheckReport, run_suite, verify

__version__ = "0.1.0"
