from .coverage import (CoverageObjective, MissionGrid, coverage_constraint,
                       coverage_objective, point_grid, rectangular_grid)
from .scheduling import (TABLE1, SchedulingObjective, SuccessMatrix,
                         random_scheduling_instance, scheduling_constraint,
                         scheduling_objective, table1_matrix)

__all__ = [
    "CoverageObjective", "MissionGrid", "coverage_constraint",
    "coverage_objective", "point_grid", "rectangular_grid",
    "TABLE1", "SchedulingObjective", "SuccessMatrix",
    "random_scheduling_instance", "scheduling_constraint",
    "scheduling_objective", "table1_matrix",
]
