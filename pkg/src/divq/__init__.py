"""divq: CP- and P-divisibility tests for single-qubit quantum processes.

The package decides, from the time-dependent generator of a differentiable
qubit process, whether the process is CP-divisible (every intermediate map
completely positive) or P-divisible (every intermediate map positive), and
ships closed-form criteria for X-shaped, O-shaped and non-unital anisotropic
Pauli generators together with a region-scan / process-sweep command line
front end.
"""

from divq.hermitian import (
    eigen_psd,
    principal_minors_3x3,
    sylvester_psd,
)
from divq.representations import (
    BlochAffineGenerator,
    ChoiGeneratorQubit,
    GeneratorChoiMatrix,
    MasterEquationForm,
    assemble_choi,
    bloch_to_choi,
    canonical_form,
    choi_to_bloch,
    choi_to_master,
    disassemble_choi,
    master_to_choi,
)
from divq.divisibility import (
    DivisibilityVerdict,
    MinimizerOptions,
    TorusPoint,
    classify,
    local_cp,
    local_p,
    p_value,
)
from divq.families import (
    NotPauliClassError,
    OShapeParams,
    PauliParams,
    XShapeParams,
    master_to_pauli,
    o_cp,
    o_p,
    pauli_cp,
    pauli_gamma_cp,
    pauli_p,
    pauli_p_boundary,
    pauli_to_master,
    x_cp,
    x_p,
)
from divq.process import (
    ProcessTrace,
    SingularProcessError,
    SweepReport,
    generator_at,
    sweep,
)
from divq.presets import make_preset

__version__ = "0.1.0"
