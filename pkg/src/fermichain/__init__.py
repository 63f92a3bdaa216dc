"""Time evolution of few spin-1/2 fermions on open Hubbard chains with
asymmetric two-site barrier potentials.

Energies are in units of the hopping amplitude J, times in 1/J, hbar = 1.
Sites are labeled 1..L.  Dynamics is exact within a fixed (N_up, N_down)
sector: sparse Hamiltonians assembled over occupation bitmasks, propagated
by a dense eigendecomposition oracle, a Lanczos/Krylov stepper, or a
truncated Taylor series.
"""

from ._kernels import active_backend, available_backends, use_backend
from .basis import (
    ProductBasis,
    SpinSectorBasis,
    apply_hop,
    apply_move,
    enumerate_sector,
    mirror_mask,
    product_basis,
)
from .errors import CapacityError, ConfigError, NumericalError, ParameterError
from .evolution import (
    PropagatorConfig,
    Trajectory,
    evolve_dense,
    evolve_step,
    evolve_trajectory,
)
from .hamiltonian import (
    BarrierOrientation,
    HubbardParams,
    SparseHamiltonian,
    barrier_potential,
    build_fk_hamiltonian,
    build_hamiltonian,
    build_single_particle,
    jstar_site,
    total_spin_squared,
)
from .observables import (
    ObservableSpec,
    density_profile,
    doublon_count,
    n_after,
    site_density,
    time_average,
    total_number,
    trap_time,
)
from .scenarios import (
    ScenarioConfig,
    SweepConfig,
    load_config,
    load_preset,
    preset_names,
    resolve_config,
    run_scenario,
    run_sweep,
)
from .states import (
    StateVector,
    doublon_at,
    doublon_plus_up,
    from_amplitudes,
    mirror_state,
    singlet_pair,
    single_particle_at,
    triplet_pair,
)
from .verification import (
    fk_equivalence_residual,
    propagator_mirror_residual,
    run_fk_suite,
    run_symmetry_suite,
    tunneling_symmetry_gap,
)

__version__ = "0.1.0"
