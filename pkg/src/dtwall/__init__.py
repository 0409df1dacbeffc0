"""Exact wall-crossing computations for rank-one DT/PT invariants on a toy charge lattice."""
from .lattice import ClassVector, ConfigError, LatticeConfig, Window, decompose, euler_pairing
from .series import MonoidSeries, exp_series, log_series, macmahon
from .stability import ChargePath, GaussRational, XiCharge, chamber_classify, find_walls, phase_cmp
from .toycat import Quiver, QuiverRep, WeakStabilityFn, hn_filtration
from .wallcross import InvariantTable, WallGerm, dt_closed_form, dtpt_check, transform

__version__ = "0.1.0"
