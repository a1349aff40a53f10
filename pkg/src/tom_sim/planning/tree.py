"""
Planning trees and their record form.

A tree alternates belief, policy and observation nodes. Single-agent trees
read belief -> policy -> observation -> policy -> ... ; joint trees built
by the Theory-of-Mind planner repeat the four expansion steps
(other policy, focal policy, focal observation, other observation) below a
root that carries the backwards-pass result.

Subtrees reached from identical beliefs at the same depth are shared
objects; node ids are only assigned when a tree is walked or exported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from ..inference.belief import Categorical, FactoredBelief
from ..utils.errors import ExportError


class NodeKind(Enum):
    BELIEF = 'belief'
    POLICY = 'policy'
    OBSERVATION = 'observation'


class Owner(Enum):
    FOCAL = 'focal'
    OTHER = 'other'


# Step labels of the joint expansion; the root carries the backwards pass.
STEP_OTHER_POLICY = 1
STEP_FOCAL_POLICY = 2
STEP_FOCAL_OBSERVATION = 3
STEP_OTHER_OBSERVATION = 4
STEP_BACKWARD_PASS = 5

JOINT_CYCLE: Tuple[Tuple[NodeKind, Owner], ...] = (
    (NodeKind.POLICY, Owner.OTHER),
    (NodeKind.POLICY, Owner.FOCAL),
    (NodeKind.OBSERVATION, Owner.FOCAL),
    (NodeKind.OBSERVATION, Owner.OTHER),
)


@dataclass
class PlanNode:
    """One node of a planning tree.

    ``efe`` is the node's expected free energy in nats: the root value for
    belief nodes, G(a) for policy nodes and the per-outcome term (utility
    minus information gain plus expected future value) for observation
    nodes. ``probability`` is the action posterior or outcome probability.
    """

    kind: NodeKind
    owner: Owner = Owner.FOCAL
    step: int = 0
    depth: int = 0
    efe: float = 0.0
    probability: float = 1.0
    action: Optional[int] = None
    action_name: Optional[str] = None
    outcome: Optional[Tuple[int, ...]] = None
    outcome_label: Optional[str] = None
    belief: Optional[FactoredBelief] = None
    other_belief: Optional[FactoredBelief] = None
    children: List["PlanNode"] = field(default_factory=list)

    @property
    def label(self) -> str:
        if self.kind is NodeKind.POLICY:
            return self.action_name or str(self.action)
        if self.kind is NodeKind.OBSERVATION:
            return self.outcome_label or str(self.outcome)
        return 'root'


@dataclass
class PlanTree:
    """Result of one planning call."""

    root: PlanNode
    posterior: Categorical
    action_names: Tuple[str, ...]
    joint: bool = False

    def walk(self) -> Iterator[Tuple[int, Optional[int], PlanNode]]:
        """Pre-order (node id, parent id, node); shared subtrees are visited once per parent."""
        counter = 0
        stack: List[Tuple[Optional[int], PlanNode]] = [(None, self.root)]
        while stack:
            parent_id, node = stack.pop()
            node_id = counter
            counter += 1
            yield node_id, parent_id, node
            for child in reversed(node.children):
                stack.append((node_id, child))

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())

    def best_action(self) -> int:
        return self.posterior.argmax()


def alternation_violations(tree: PlanTree) -> List[str]:
    """Every parent/child pair that breaks the expected node order."""
    problems: List[str] = []
    if tree.root.kind is not NodeKind.BELIEF:
        problems.append(f"root is a {tree.root.kind.value} node")
    for node_id, _, node in tree.walk():
        for child in node.children:
            if tree.joint:
                if node.kind is NodeKind.BELIEF:
                    expected = JOINT_CYCLE[0]
                else:
                    position = JOINT_CYCLE.index((node.kind, node.owner))
                    expected = JOINT_CYCLE[(position + 1) % len(JOINT_CYCLE)]
                if (child.kind, child.owner) != expected:
                    problems.append(f"node {node_id} ({node.kind.value}/{node.owner.value}) has a "
                                    f"{child.kind.value}/{child.owner.value} child")
            else:
                allowed = {
                    NodeKind.BELIEF: (NodeKind.POLICY,),
                    NodeKind.POLICY: (NodeKind.OBSERVATION,),
                    NodeKind.OBSERVATION: (NodeKind.BELIEF, NodeKind.POLICY),
                }[node.kind]
                if child.kind not in allowed:
                    problems.append(f"node {node_id} ({node.kind.value}) has a "
                                    f"{child.kind.value} child")
    return problems


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass_json
@dataclass
class TreeHeader:
    """First line of a records file."""

    joint: bool
    action_names: List[str]
    posterior: List[float]
    record: str = 'tree'


@dataclass_json
@dataclass
class NodeRecord:
    """Flat, lossless form of one PlanNode."""

    node_id: int
    parent_id: Optional[int]
    kind: str
    owner: str
    step: int
    depth: int
    efe: float
    probability: float
    action: Optional[int] = None
    action_name: Optional[str] = None
    outcome: Optional[List[int]] = None
    outcome_label: Optional[str] = None
    belief: Optional[List[List[float]]] = None
    other_belief: Optional[List[List[float]]] = None
    record: str = 'node'


def _belief_to_lists(belief: Optional[FactoredBelief]) -> Optional[List[List[float]]]:
    if belief is None:
        return None
    return [f.probs.tolist() for f in belief]


def _belief_from_lists(vectors: Optional[List[List[float]]]) -> Optional[FactoredBelief]:
    if vectors is None:
        return None
    return FactoredBelief(tuple(Categorical(np.array(v, dtype=np.float64)) for v in vectors))


def tree_to_records(tree: PlanTree) -> Tuple[TreeHeader, List[NodeRecord]]:
    header = TreeHeader(joint=tree.joint, action_names=list(tree.action_names),
                        posterior=tree.posterior.probs.tolist())
    records = [
        NodeRecord(
            node_id=node_id,
            parent_id=parent_id,
            kind=node.kind.value,
            owner=node.owner.value,
            step=node.step,
            depth=node.depth,
            efe=float(node.efe),
            probability=float(node.probability),
            action=node.action,
            action_name=node.action_name,
            outcome=list(node.outcome) if node.outcome is not None else None,
            outcome_label=node.outcome_label,
            belief=_belief_to_lists(node.belief),
            other_belief=_belief_to_lists(node.other_belief),
        )
        for node_id, parent_id, node in tree.walk()
    ]
    return header, records


def tree_from_records(header: TreeHeader, records: List[NodeRecord]) -> PlanTree:
    nodes = {}
    root: Optional[PlanNode] = None
    for rec in records:
        node = PlanNode(
            kind=NodeKind(rec.kind),
            owner=Owner(rec.owner),
            step=rec.step,
            depth=rec.depth,
            efe=rec.efe,
            probability=rec.probability,
            action=rec.action,
            action_name=rec.action_name,
            outcome=tuple(rec.outcome) if rec.outcome is not None else None,
            outcome_label=rec.outcome_label,
            belief=_belief_from_lists(rec.belief),
            other_belief=_belief_from_lists(rec.other_belief),
        )
        nodes[rec.node_id] = node
        if rec.parent_id is None:
            if root is not None:
                raise ValueError("records contain more than one root")
            root = node
        else:
            nodes[rec.parent_id].children.append(node)
    if root is None:
        raise ValueError("records contain no root")
    return PlanTree(root=root, posterior=Categorical(np.array(header.posterior)),
                    action_names=tuple(header.action_names), joint=header.joint)


def dumps_records(tree: PlanTree) -> str:
    """JSON lines: the tree header followed by one record per node."""
    header, records = tree_to_records(tree)
    lines = [header.to_json()] + [r.to_json() for r in records]  # type: ignore[attr-defined]
    return '\n'.join(lines) + '\n'


def loads_records(text: str, source: str = '<string>') -> PlanTree:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ExportError(source, "no records")
    try:
        header = TreeHeader.from_dict(json.loads(lines[0]))  # type: ignore[attr-defined]
        records = [NodeRecord.from_dict(json.loads(line))  # type: ignore[attr-defined]
                   for line in lines[1:]]
        return tree_from_records(header, records)
    except (KeyError, ValueError, TypeError) as e:
        raise ExportError(source, f"malformed tree records: {e}") from e
