"""No-signaling audits of density-matrix dynamics built on equivalent ensembles and their purifications."""
from .auditor import (
    AuditReport,
    LinearityReport,
    Verdict,
    audit_linearity,
    audit_no_signaling,
    demo_signaling_protocol,
    unraveling_consistency,
)
from .dynamics import (
    FigureThreeTable,
    JumpUnraveling,
    LindbladMaster,
    NonlinearWeinberg,
    Unitary,
    evolve_density,
    evolve_ensemble,
    evolve_pure_density,
    evolve_state,
    integrate_lindblad,
    lindblad_rhs,
    unravel,
)
from .ensemble import (
    Ensemble,
    apply_mixing,
    density_of,
    equivalent,
    mixing_matrix,
    random_equivalent_ensemble,
    spectral_ensemble,
)
from .hilbert import complete_to_unitary, hermitian_eig, tensor_product, trace_distance
from .purification import bob_observable, joint_purification, purify, remote_prepare

__version__ = "0.1.0"
