"""Goal-programming toolkit for multiobjective vehicle routing with soft time windows."""
from .goalprog import GoalSpec, derive_weight_vector
from .instance import GeneratorSpec, Instance, generate_instance, read_instance, write_instance
from .solution import ObjectiveVector, ParetoArchive, Solution, decode, evaluate

__all__ = [
    "GeneratorSpec", "GoalSpec", "Instance", "ObjectiveVector", "ParetoArchive", "Solution",
    "decode", "derive_weight_vector", "evaluate", "generate_instance", "read_instance", "write_instance",
]
__version__ = "0.1.0"
