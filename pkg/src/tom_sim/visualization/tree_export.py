"""
Planning tree export.

``records`` writes the lossless JSON-lines form (see ``planning.tree``);
``graph`` writes Graphviz DOT text with one node per tree node. Graph
nodes are coloured by owner (focal red, other purple) and shaped by kind:
circles for beliefs, boxes for evaluated actions, diamonds for expected
observations.
"""

from pathlib import Path
from typing import List, Union

from ..planning.tree import NodeKind, Owner, PlanNode, PlanTree, dumps_records, loads_records
from ..utils.errors import ExportError
from ..utils.logger import TomSimLogger

EXPORT_FORMATS = ('records', 'graph')

SHAPES = {
    NodeKind.BELIEF: 'circle',
    NodeKind.POLICY: 'box',
    NodeKind.OBSERVATION: 'diamond',
}
COLORS = {
    Owner.FOCAL: 'red',
    Owner.OTHER: 'purple',
}

logger = TomSimLogger('tom_sim.TreeExport')


def _escape(text: str) -> str:
    return text.replace('\\', '\\\\').replace('"', '\\"')


def _node_label(node: PlanNode) -> str:
    parts = []
    if node.step:
        parts.append(f"[{node.step}]")
    parts.append(node.label)
    head = ' '.join(parts)
    return f"{head}\\nG={node.efe:.2f} P={node.probability:.2f}"


def tree_to_dot(tree: PlanTree) -> str:
    """DOT text for a tree; shared subtrees are drawn once per parent."""
    nodes: List[str] = []
    links: List[str] = []
    for node_id, parent_id, node in tree.walk():
        nodes.append('node{} [label="{}",shape={},color={}];'.format(
            node_id, _escape(_node_label(node)), SHAPES[node.kind], COLORS[node.owner]))
        if parent_id is not None:
            links.append('node{} -> node{};'.format(parent_id, node_id))
    lines = ['digraph G{', 'node [fontsize=10];'] + nodes + links + ['}']
    return '\n'.join(lines) + '\n'


def export_tree(tree: PlanTree, path: Union[str, Path], fmt: str = 'records') -> Path:
    """Write ``tree`` to ``path`` as records or a graph.

    Raises:
        ExportError: the tree is empty, the format is unknown or the file
            cannot be written.
    """
    path = Path(path)
    if tree is None or tree.root is None or not tree.root.children:
        raise ExportError(str(path), "tree has no expanded nodes")
    if fmt not in EXPORT_FORMATS:
        raise ExportError(str(path), f"unknown format {fmt!r}; expected one of {EXPORT_FORMATS}")
    text = dumps_records(tree) if fmt == 'records' else tree_to_dot(tree)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise ExportError(str(path), str(e)) from e
    logger.info(f"Exported {tree.node_count()} nodes to {path} ({fmt})")
    return path


def load_tree(path: Union[str, Path]) -> PlanTree:
    """Read a tree written with the records format."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ExportError(str(path), str(e)) from e
    return loads_records(text, str(path))
