"""周期的に周波数変調された駆動二準位系の共鳴蛍光スペクトル。

厳密なFloquet-Liouville伝搬、厳密なFloquet状態と永年近似、Van Vleck摂動論の3つの経路でスペクトルを計算し、
Floquet状態の一般化パリティとスペクトルの対称性の関係を調べます。
"""

__version__ = "0.1.0"

from .elements import (
    ParityReport,
    TransitionElements,
    parity_analysis,
    parity_eigenvalues,
    transition_elements,
    verify_identities,
)
from .errors import (
    AliasingError,
    ConfigError,
    CorrelationWindowError,
    FloquetDegeneracyError,
    FluofloqError,
    IntegrationBlowupError,
    JacobiConvergenceError,
    MonodromyConsistencyError,
    NoRelaxationError,
    SambeCutoffError,
    SecularValidityWarning,
    VanVleckResonanceError,
    VanVleckValidityWarning,
)
from .exact import (
    CorrelationTrace,
    ParityChain,
    SteadyState,
    correlation,
    exact_route,
    exact_spectrum,
    liouvillian,
    parity_chain,
    principal_matrix,
    steady_state_exact,
)
from .floquet import (
    Backend,
    Branch,
    FloquetSolution,
    monodromy,
    sambe_hamiltonian,
    solve_floquet,
    solve_floquet_sambe,
)
from .model import (
    Harmonic,
    Modulation,
    ParityCase,
    ParityClass,
    SystemParams,
    classify_parity,
    effective_hamiltonian,
    eval_f,
)
from .secular import (
    CoherentLine,
    LineFamily,
    SecularRates,
    SpectralLine,
    Spectrum,
    excited_population,
    rates,
    secular_spectrum,
    symmetric_grid,
)
from .vanvleck import VanVleckSolution, fourier_amplitudes, vanvleck_elements, vanvleck_solution
