"""
Relativistic quantum mechanics on finite spacetime event grids.

Wavefunctions over 4D events (not 3D configurations at a time),
Poincare transforms acting unitarily by band-limited resampling,
mass-shell constraint operators (Klein-Gordon branches and the Dirac
first-order form), the dictionary back to ordinary time-evolved QM,
and multi-event / occupation-number states.

Conventions everywhere: hbar = c = 1, metric (+,-,-,-), time FFT
kernel e^{+iEt}/sqrt(2 pi), space kernels e^{-ipx}/sqrt(2 pi),
Theta(0) = 1.
"""

from .minkowski import METRIC, PAULI, GAMMA, LorentzTransform, minkowski_dot
from .grids import AxisGrid, Grid3D, Grid4D, grid_from_dict
from .spectral import fft3, ifft3, fft4, ifft4, axis_to_dual, axis_to_primal
from .states import EventState, POSITION, MOMENTUM, random_band_limited
from .poincare import (PoincareElement, ClearanceError, apply_operator,
                       commutator_check, generator_exponential,
                       generator_exponential_check, resample_lorentz,
                       scalar_product_invariance, translate)
from .constraints import (KG_PLUS, KG_MINUS, DIRAC, dispersion, kg_symbol,
                          KGSymbol, kg_residual, dirac_matrix, dirac_u,
                          dirac_eigensystem, DiracSystem, dirac_residual,
                          branch_energies, OnShellState, build_onshell_kg,
                          build_onshell_dirac, slice_state, onshell_boost,
                          lift_nearest_plane, lift_windowed, erf_window)
from .correspondence import (QMTrajectory, lift_trajectory, slice_at_time,
                             schrodinger_evolve, dirac_evolve,
                             check_initial_condition, norm_modulation,
                             kg_current, current_conservation_residual,
                             boost_pair_element, two_path_boost_check)
from .multievent import (ModeSet, NEventState, NBodyConstraint, FockState,
                         AnnihilatedStateError, SYM_NONE, SYM_S, SYM_A,
                         symmetrize, lift_product_form, slice_equal_time,
                         nbody_apply, kernel_intersection_check,
                         fock_constraint_apply, boost_multievent)

__version__ = "0.1.0"
