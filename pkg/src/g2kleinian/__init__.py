"""Genus-2 Kleinian functions, periods and the Abel map through Richelot towers."""
from .abel import (AbelResult, CurvePoint, Divisor2, KummerVec, abel_map, divisor_from_z,
                   kummer_coords, lattice_distance, reduce_mod_lattice)
from .cpoly import CPoly, Moebius, bracket, delta, discr, is_admissible, res, roots
from .disks import Disk, DiskTriple, find_disks, is_subordinate
from .errors import (AbelError, CertificateError, ConvergenceError, InputError,
                     KleinianError)
from .kleinian import EvalContext, build_context, eval_S, sigma_zeta, wp
from .periods import PeriodData, compute_periods, is_quasi_reduced
from .richelot import DegenerateCurve, RichelotTower, iterate_tower, richelot_step
from .thetaref import SVec, oracle_S

__version__ = "0.1.0"
