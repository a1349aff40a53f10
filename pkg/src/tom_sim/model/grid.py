"""
Grid geometry shared by the generative models and the environment.

Cells are numbered 1..width*height row-major from the top-left corner, so a
3x3 grid reads::

    1 2 3
    4 5 6
    7 8 9
"""

import numbers
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..utils.errors import BadCellError

# Row/column displacement of every action name.
MOVES: Dict[str, Tuple[int, int]] = {
    'up': (-1, 0),
    'down': (1, 0),
    'left': (0, -1),
    'right': (0, 1),
    'up_left': (-1, -1),
    'up_right': (-1, 1),
    'down_left': (1, -1),
    'down_right': (1, 1),
    'eat': (0, 0),
    'noop': (0, 0),
}

COLLISION_ACTIONS: Tuple[str, ...] = (
    'up', 'down', 'left', 'right',
    'up_left', 'up_right', 'down_left', 'down_right',
    'noop',
)
FORAGING_ACTIONS: Tuple[str, ...] = ('up', 'down', 'left', 'right', 'eat', 'noop')


@dataclass(frozen=True)
class Grid:
    """Rectangular grid of numbered cells."""

    width: int = 3
    height: int = 3

    @property
    def cell_count(self) -> int:
        return self.width * self.height

    @property
    def cells(self) -> List[int]:
        return list(range(1, self.cell_count + 1))

    def check_cell(self, cell: int) -> int:
        if (not isinstance(cell, numbers.Integral) or isinstance(cell, bool)
                or not 1 <= cell <= self.cell_count):
            raise BadCellError(cell, self.cell_count)
        return int(cell)

    def coords(self, cell: int) -> Tuple[int, int]:
        self.check_cell(cell)
        return divmod(cell - 1, self.width)

    def cell_at(self, row: int, col: int) -> Optional[int]:
        if 0 <= row < self.height and 0 <= col < self.width:
            return row * self.width + col + 1
        return None

    def move(self, cell: int, action: str) -> Optional[int]:
        """Destination of ``action`` from ``cell``; None when it leaves the grid."""
        row, col = self.coords(cell)
        d_row, d_col = MOVES[action]
        return self.cell_at(row + d_row, col + d_col)

    def reachable(self, cell: int, actions: Sequence[str]) -> List[int]:
        """Cells reachable from ``cell`` with one valid action (staying included)."""
        return sorted({dest for dest in (self.move(cell, a) for a in actions) if dest is not None})

    def orchard_cells(self) -> List[int]:
        """Cells of the top and bottom rows."""
        top = list(range(1, self.width + 1))
        bottom = list(range(self.cell_count - self.width + 1, self.cell_count + 1))
        return sorted(set(top + bottom))

    def is_orchard(self, cell: int) -> bool:
        row, _ = self.coords(cell)
        return row in (0, self.height - 1)
