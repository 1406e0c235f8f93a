"""Periodic-invariant admissible sets and reference governors for linear periodic systems."""

from .errors import (InfeasibleGovernorState, LpIterationLimit, NotFinitelyDetermined,
                     PeriodicRGError, PolytopeError, SchemaError, ValidationError)
from .governor import (GovernorF1State, GovernorF2State, GovernorStep, initialize, solve_kappa,
                       step_f1, step_f2)
from .lp import LpOutcome, maximize
from .mas import (MasStorage, PeriodicMas, SteadyStateMap, build_storage, compute_omega0,
                  expand_slot, gamma, residual)
from .model import (LiftedSystem, PeriodicSystem, PlantWithInput, ValidationReport,
                    augment_fixed_input, augment_periodic_input, lift, monodromy, validate)
from .polytope import HPolytope, append_nonredundant, contains, set_equal, support, vertices_2d
from .simulator import ReferenceSignal, SimulationTrace, audit, simulate
from .sysfile import load_system, save_system
from .tradeoff import TradeoffReport, formula_f1, formula_f2, measure, sweep

__version__ = "0.1.0"
