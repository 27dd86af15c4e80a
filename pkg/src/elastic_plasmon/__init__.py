"""Spectral theory of elastic plasmon resonance on spheres, with quadrature checks."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AccuracyError,
    DegenerateMaterialError,
    DegreeError,
    DomainError,
    ElastoPlasmonError,
    PoleError,
    ResolutionError,
    SingularityError,
    SingularSystemError,
)
from .kernels import Convexity, LameParams, convexity_status, kelvin_matrix, kupradze_matrix, m_omega  # noqa: E402
from .modes import ModalField, ModeIndex, SphereGrid, project_modal, raw_eigenfunction, spherical_harmonic  # noqa: E402
from .spectrum import (  # noqa: E402
    BranchKind,
    CriticalBranch,
    PlasmonConfig,
    critical_value,
    np_eigenvalue,
    resonance_denominator,
    sl_eigenvalue,
)
