"""Tree export and text rendering."""

from .renderer import render_path, render_state, render_trace
from .tree_export import EXPORT_FORMATS, export_tree, load_tree, tree_to_dot

__all__ = [
    "EXPORT_FORMATS",
    "export_tree",
    "load_tree",
    "render_path",
    "render_state",
    "render_trace",
    "tree_to_dot",
]
