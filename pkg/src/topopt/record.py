"""Per-iteration optimization history."""
from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np


class IterRow(NamedTuple):
    iter: int
    compliance: float
    volfrac: float
    change: float
    checkerboard_index: float


@dataclass
class OptRecord:
    """Iteration log of one run.

    ``compliance`` is ``U^T K U`` of the design analysed in that iteration; the
    remaining columns describe the design produced by the update.
    """

    method: str = ""
    rows: List[IterRow] = field(default_factory=list)
    converged: bool = False

    def append(self, *values):
        self.rows.append(IterRow(*values))

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    @property
    def compliance(self):
        return self.column("compliance")
