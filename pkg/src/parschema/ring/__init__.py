"""Priority loops, execution diagrams and decentralized ring algorithms."""
from .diagrams import Cell, ExecutionDiagram, diagram_rotating, diagram_shared, sequential_combinations
from .equalize import EqualizeTrace, SortTrace, equalize, pairs, ring_sort
from .handshake import (TRANSITIONS, Detection, Event, HandshakeTrace, detect_fault, partner, role,
                        run_handshake, step, transition_table)
from .priority import (LoopResult, OutputList, OutputView, PriorityLoop, PriorityLoopError,
                       expenses_data, expenses_loop, four_list_loop, independence_level,
                       product_sum_loop, run_priority_loop)

__all__ = [name for name in dir() if not name.startswith("_")]
