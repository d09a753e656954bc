"""Index dependence: connection equations, predecessor programs and wavefronts."""
from .equations import (BOUNDED, BUDGET, EXACT, LINEAR, POLYNOMIAL, UNDECIDABLE, UNSOLVABLE,
                        ConnectionEquation, Solution, build_connection_equations,
                        solve_connection)
from .lattice import IntegerLattice, column_echelon, solve_integer_system
from .nest import (Domain, LoopNest, NestError, Ref, Statement, format_nest, lower_to_schema,
                   parse_nest, run_nest)
from .wavefront import (KERNELS, PredecessorProgram, affine_normal, certify_normal,
                        dependence_cone, diagonal, execute_sequential, execute_wavefront,
                        four_point, from_nest, hyperplane_layers, is_parallel, seeded_boundary,
                        wavefront_layers)

__all__ = [
    "BOUNDED", "BUDGET", "EXACT", "KERNELS", "LINEAR", "POLYNOMIAL", "UNDECIDABLE", "UNSOLVABLE",
    "ConnectionEquation", "Domain", "IntegerLattice", "LoopNest", "NestError",
    "PredecessorProgram", "Ref", "Solution", "Statement", "affine_normal",
    "build_connection_equations", "certify_normal", "column_echelon", "dependence_cone",
    "diagonal", "execute_sequential", "execute_wavefront", "format_nest", "four_point",
    "from_nest", "hyperplane_layers", "is_parallel", "lower_to_schema", "parse_nest",
    "run_nest", "seeded_boundary", "solve_connection", "solve_integer_system",
    "wavefront_layers",
]
