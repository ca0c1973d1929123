"""Rooted labeled trees carrying a probability distribution on their leaves.

A tree is built from labeled parent-to-child edges plus a leaf mass map.
Construction validates the shape, normalization and sign of the input, then
prunes zero-mass leaves (and any branch whose leaves all carry zero mass) so
that downstream identities can assume every leaf has positive probability.

Node ids and edge labels are arbitrary hashable values; labels must be
unique among siblings.  Children keep the order in which their edges were
supplied, and all iteration is in preorder, so every float-mode computation
downstream accumulates in a reproducible order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import (
    CycleDetected,
    DuplicateSiblingLabel,
    LeafMassMismatch,
    MassNotNormalized,
    MultipleParents,
    MultipleRoots,
    NegativeMass,
    ParamsInvalid,
)

__all__ = [
    "Tree",
    "build_tree",
    "node_probabilities",
    "branching_distributions",
    "path_lengths",
    "structurally_equal",
]

NodeId = Hashable
Label = Hashable

MASS_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Tree:
    """A validated rooted tree with positive leaf probabilities.

    ``children`` maps every node to its (label, child) pairs; leaves map to
    the empty tuple.  ``nodes`` lists all nodes in preorder.  ``exact`` is
    True when the leaf masses are Fractions and False when they are floats.
    """

    root: NodeId
    children: dict[NodeId, tuple[tuple[Label, NodeId], ...]]
    leaf_mass: dict[NodeId, Fraction | float]
    parent_edge: dict[NodeId, tuple[NodeId, Label]] = field(repr=False)
    nodes: tuple[NodeId, ...] = field(repr=False)
    exact: bool = True

    @property
    def leaves(self) -> tuple[NodeId, ...]:
        return tuple(n for n in self.nodes if not self.children[n])

    @property
    def branching_nodes(self) -> tuple[NodeId, ...]:
        return tuple(n for n in self.nodes if self.children[n])

    @property
    def label_alphabet(self) -> tuple[Label, ...]:
        labels = {lab for kids in self.children.values() for lab, _ in kids}
        return tuple(sorted(labels))

    def path_of(self, node: NodeId) -> tuple[Label, ...]:
        """Labels along the path from the root down to ``node``."""
        path = []
        while node != self.root:
            node, label = self.parent_edge[node]
            path.append(label)
        path.reverse()
        return tuple(path)

    def depth_of(self, node: NodeId) -> int:
        depth = 0
        while node != self.root:
            node, _ = self.parent_edge[node]
            depth += 1
        return depth


def _coerce_masses(
    leaf_mass: Mapping[NodeId, object], exact: bool | None
) -> tuple[dict[NodeId, Fraction | float], bool]:
    has_float = any(isinstance(m, float) for m in leaf_mass.values())
    if exact is None:
        exact = not has_float
    if exact and has_float:
        raise ParamsInvalid(
            "exact mode requires integer or Fraction masses, got floats"
        )
    coerced: dict[NodeId, Fraction | float] = {}
    for node, mass in leaf_mass.items():
        if exact:
            coerced[node] = Fraction(mass)
        else:
            coerced[node] = float(mass)
    return coerced, exact


def build_tree(
    edges: Iterable[tuple[NodeId, Label, NodeId]],
    leaf_mass: Mapping[NodeId, object],
    exact: bool | None = None,
) -> Tree:
    """Validate (parent, label, child) edges plus leaf masses into a Tree.

    Checks, in order: no node has two parents, sibling labels are unique,
    there is exactly one root and every node is reachable from it (anything
    else indicates a cycle), mass sits only on childless nodes, no mass is
    negative, and the masses sum to one (exactly in exact mode, within
    1e-9 in float mode).  Zero-mass leaves are then pruned together with
    any internal node left without descendants of positive mass.

    ``exact`` picks the numeric mode; None infers it from the mass types
    (any float mass means float mode).
    """
    edges = list(edges)
    children: dict[NodeId, list[tuple[Label, NodeId]]] = {}
    parent_edge: dict[NodeId, tuple[NodeId, Label]] = {}
    for parent, label, child in edges:
        if child in parent_edge:
            raise MultipleParents(f"node {child!r} has more than one parent")
        if any(lab == label for lab, _ in children.get(parent, ())):
            raise DuplicateSiblingLabel(
                f"node {parent!r} has two children labeled {label!r}"
            )
        parent_edge[child] = (parent, label)
        children.setdefault(parent, []).append((label, child))
        children.setdefault(child, [])

    all_nodes = set(children) | set(leaf_mass)
    if not all_nodes:
        raise ParamsInvalid("empty tree: no edges and no leaf masses")
    for node in leaf_mass:
        children.setdefault(node, [])

    roots = [n for n in all_nodes if n not in parent_edge]
    if not roots:
        raise CycleDetected("no root: every node has a parent")
    if len(roots) > 1:
        raise MultipleRoots(f"multiple roots: {sorted(map(repr, roots))}")
    root = roots[0]

    reached = {root}
    stack = [root]
    while stack:
        node = stack.pop()
        for _, child in children[node]:
            if child not in reached:
                reached.add(child)
                stack.append(child)
    if reached != all_nodes:
        stray = all_nodes - reached
        raise CycleDetected(
            f"{len(stray)} node(s) unreachable from root {root!r}"
        )

    for node in leaf_mass:
        if children[node]:
            raise LeafMassMismatch(
                f"mass assigned to internal node {node!r}"
            )

    masses, exact_mode = _coerce_masses(leaf_mass, exact)
    for node, mass in masses.items():
        if mass < 0:
            raise NegativeMass(f"leaf {node!r} has negative mass {mass}")
    total = sum(masses.values())
    if exact_mode:
        if total != 1:
            raise MassNotNormalized(f"leaf masses sum to {total}, expected 1")
    elif abs(total - 1.0) > MASS_SUM_TOLERANCE:
        raise MassNotNormalized(f"leaf masses sum to {total!r}, expected 1")

    # Prune zero-mass leaves, then every branch that lost all its leaves.
    # Decide bottom-up over an explicit stack; recursion would be bounded
    # only by tree height.
    keep: set[NodeId] = set()
    order: list[NodeId] = []
    stack = [root]
    while stack:
        node = stack.pop()
        order.append(node)
        for _, child in children[node]:
            stack.append(child)
    for node in reversed(order):
        kids = children[node]
        if kids:
            if any(child in keep for _, child in kids):
                keep.add(node)
        elif masses.get(node, 0) > 0:
            keep.add(node)

    pruned_children = {
        node: tuple((lab, c) for lab, c in children[node] if c in keep)
        for node in keep
    }
    pruned_parent = {
        node: parent_edge[node] for node in keep if node in parent_edge
    }
    pruned_mass = {
        node: mass for node, mass in masses.items() if node in keep
    }

    preorder: list[NodeId] = []
    stack = [root]
    while stack:
        node = stack.pop()
        preorder.append(node)
        for lab, child in reversed(pruned_children[node]):
            stack.append(child)

    return Tree(
        root=root,
        children=pruned_children,
        leaf_mass=pruned_mass,
        parent_edge=pruned_parent,
        nodes=tuple(preorder),
        exact=exact_mode,
    )


def node_probabilities(tree: Tree) -> dict[NodeId, Fraction | float]:
    """Probability of passing through each node: leaf mass summed below it.

    The root always carries probability one.  Internal sums run over
    children in stored order, so float results are reproducible.
    """
    q: dict[NodeId, Fraction | float] = {}
    for node in reversed(tree.nodes):
        kids = tree.children[node]
        if kids:
            total = q[kids[0][1]]
            for _, child in kids[1:]:
                total = total + q[child]
            q[node] = total
        else:
            q[node] = tree.leaf_mass[node]
    return q


def branching_distributions(
    tree: Tree, q: Mapping[NodeId, Fraction | float] | None = None
) -> dict[NodeId, dict[Label, Fraction | float]]:
    """Per-branching-node label distribution: child probability over own.

    Only nodes with children appear in the result.  Pass precomputed node
    probabilities via ``q`` to avoid recomputing them.
    """
    if q is None:
        q = node_probabilities(tree)
    dists: dict[NodeId, dict[Label, Fraction | float]] = {}
    for node in tree.nodes:
        kids = tree.children[node]
        if kids:
            qj = q[node]
            dists[node] = {lab: q[child] / qj for lab, child in kids}
    return dists


def path_lengths(tree: Tree) -> dict[NodeId, int]:
    """Edge count from the root to each node."""
    lengths = {tree.root: 0}
    for node in tree.nodes:
        for _, child in tree.children[node]:
            lengths[child] = lengths[node] + 1
    return lengths


def structurally_equal(a: Tree, b: Tree) -> bool:
    """True when both trees have the same label paths and leaf masses.

    Node ids are ignored; two trees are compared purely by the labels along
    root-to-node paths and by the mass each leaf path carries.
    """
    a_leaves = {a.path_of(n): a.leaf_mass[n] for n in a.leaves}
    b_leaves = {b.path_of(n): b.leaf_mass[n] for n in b.leaves}
    if a_leaves != b_leaves:
        return False
    a_internal = {a.path_of(n) for n in a.branching_nodes}
    b_internal = {b.path_of(n) for n in b.branching_nodes}
    return a_internal == b_internal
