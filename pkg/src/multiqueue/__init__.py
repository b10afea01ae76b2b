"""Simulation and checking toolkit for multiplicity queues in a partially
synchronous message-passing system."""

from .model import (BOTTOM, DEQ, ENQ, DelayPolicy, DelayRule, EventRecord, History, Invocation,
                    MessageRecord, ModelError, OperationInstance, Run, Schedule, SystemParams,
                    as_time, bound_Q, epsilon, extract_history, local_view, make_history,
                    stagger_s)
from .simulator import ProcessBehavior, SimOutcome, SimulationError, simulate
from .algorithms import (algorithm_by_name, full_info_fifo_baseline, strawman_fast,
                         zero_u_multiplicity_queue)
from .shifting import (NEVER, AdmissibilityVerdict, ShiftError, ShiftVector,
                       earliest_distinguishing_time, is_admissible, runs_equal, shift)
from .checker import (CheckVerdict, SetLinearization, brute_force_setlin,
                      check_linearizable_fifo, check_multiplicity_setlin,
                      construction4_certificate, is_legal_sequence)

__version__ = "0.1.0"
