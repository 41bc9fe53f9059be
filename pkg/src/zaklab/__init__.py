"""Pseudospectral laboratory for the Zakharov system on the 2*pi-periodic line.

The package is organized around a small set of layers:

* ``fields``       -- Fourier-side field/state containers, norms, projections
* ``propagators``  -- exact linear flows, nonlinearities, Picard/Duhamel oracle
* ``flow``         -- Strang time-stepping for the full and hybrid truncated flows
* ``symplectic``   -- symplectic form, almost-complex structure, flow-map checks
* ``resonance``    -- resonance identities and dyadic bilinear-ratio scans
* ``studies``      -- orchestrated convergence/truncation/nonsqueezing studies
* ``cli``          -- command-line entry point writing run directories
"""

__version__ = "0.1.0"

from .fields import (
    FourierField,
    ZakharovState,
    NormSpec,
    MeanZeroError,
    project,
    sobolev_norm,
    phase_space_norm,
    fixed_mode_abs,
    derivative,
    galilean_normalize,
    galilean_restore,
    physical_evaluate,
)
from .propagators import (
    PhysicalConstants,
    PicardSettings,
    free_schrodinger,
    free_wave,
    schrodinger_nonlinearity,
    wave_forcing,
    picard_iterate,
    zakharov_rhs,
)
from .flow import (
    SchemeSpec,
    TrajectoryRecord,
    BlowupError,
    step_full,
    evolve,
    evolve_truncated,
    mass,
    hamiltonian,
    hamiltonian_truncated,
    gwp_schedule,
)
from .symplectic import (
    BallSpec,
    CylinderSpec,
    symplectic_form,
    phase_space_inner,
    apply_J,
    hamiltonian_vector_field,
    check_symplectic,
    ball_contains,
    cylinder_contains,
)
