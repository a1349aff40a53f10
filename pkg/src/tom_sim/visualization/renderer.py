"""
Text rendering of grid states and trajectories.
"""

from typing import List, Sequence

from ..environment.grid_world import GridWorldState, TaskConfig, TraceRecord, reset

# Single-character marks per agent (upper case when stuck).
AGENT_MARKS = ('r', 'p')


def _cell_text(state: GridWorldState, cell: int) -> str:
    marks = ''
    for agent, mark in enumerate(AGENT_MARKS):
        if state.cells[agent] == cell:
            marks += mark.upper() if state.stuck[agent] else mark
    apple = state.apple_at(cell)
    item = '' if apple is None else ('*' if apple else '.')
    text = (marks + item) or str(cell)
    return f"{text:^4}"


def render_state(state: GridWorldState, config: TaskConfig) -> str:
    """Grid drawing: r/p for agents (R/P when stuck), * apple, . empty orchard."""
    grid = config.grid
    rows = []
    border = '+' + '+'.join(['----'] * grid.width) + '+'
    rows.append(border)
    for row in range(grid.height):
        cells = [grid.cell_at(row, col) for col in range(grid.width)]
        rows.append('|' + '|'.join(_cell_text(state, c) for c in cells) + '|')  # type: ignore[arg-type]
        rows.append(border)
    rows.append(f"step {state.step}  rewards {list(state.rewards)}")
    return '\n'.join(rows)


def render_trace(trace: Sequence[TraceRecord], config: TaskConfig, seed: int = 0) -> str:
    """Start state followed by one drawing per recorded step."""
    state = reset(config, seed)
    blocks: List[str] = [render_state(state, config)]
    for record in trace:
        state = GridWorldState(
            task=state.task,
            step=record.step,
            cells=(record.cells[0], record.cells[1]),
            stuck=(record.stuck[0], record.stuck[1]),
            orchard=state.orchard,
            apples=tuple(record.apples[str(c)] for c in state.orchard),
            rewards=(state.rewards[0] + record.rewarded[0], state.rewards[1] + record.rewarded[1]),
        )
        blocks.append(f"actions {record.actions[0]} / {record.actions[1]}")
        blocks.append(render_state(state, config))
    return '\n'.join(blocks)


def render_path(trace: Sequence[TraceRecord], config: TaskConfig, agent: int) -> List[int]:
    """Cells visited by ``agent``, start included."""
    return [config.starts[agent]] + [record.cells[agent] for record in trace]
