"""Program schemas: model, text format, analysis, interpretations, execution."""
from .analysis import IOSets, io_sets, label_graph_order, proc_io_sets, reachable, validate_L
from .dsl import format_instruction, parse_schema, print_schema
from .execute import Outcome, RunResult, compare_runs, execute, runs_equal
from .interp import (ConcreteInterpretation, Interpretation, StandardInterpretation, Undefined,
                     bracket_depth, cell_name, parse_interpretation, print_interpretation,
                     random_standard_interpretation)
from .model import (Assign, Call, Cond, FreshNames, IndexExpr, LabelLit, Loop, Proc, Schema,
                    SchemaError, Var)

__all__ = [
    "Assign", "Call", "Cond", "ConcreteInterpretation", "FreshNames", "IOSets", "IndexExpr",
    "Interpretation", "LabelLit", "Loop", "Outcome", "Proc", "RunResult", "Schema", "SchemaError",
    "StandardInterpretation", "Undefined", "Var", "bracket_depth", "cell_name", "compare_runs",
    "execute", "format_instruction", "io_sets", "label_graph_order", "parse_interpretation",
    "parse_schema", "print_interpretation", "print_schema", "proc_io_sets",
    "random_standard_interpretation", "reachable", "runs_equal", "validate_L",
]
