"""Leaf-average/node-sum identities on probability trees.

The central identity converts a leaf expectation of a node functional f
into a weighted sum of per-node increments:

    E[f(L)] - f(root) = sum over branching j of  Q_j * E[delta_f(S_j)]

where delta_f(i) = f(i) - f(parent(i)) and the inner expectation runs over
the branching distribution at j.  ``lansit_check`` evaluates the node side
by the constructive argument behind the identity: repeatedly merge a
deepest sibling set into its parent, accumulating that node's term, until
only the root remains.  ``node_increment_sum`` is the independent direct
summation; the two walk the branching nodes in the same order and perform
the same elementary operations, so they agree bit for bit even in float
mode.

Specializing f gives the derived quantities: f = path length yields the
expected parse length, f = -log2 Q yields entropy, and f = log2(Q/Q') for
two mass assignments on one shape yields informational divergence.  Each
also has a normalized, per-branch form driven by the distribution
P_B(j) = Q_j / E[w(L)] over branching nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from .errors import DegenerateTree, FunctionalIncomplete, ShapeMismatch
from .numeric import ExactLog2, entropy_term, kl_term, log2_of
from .tree import NodeId, Tree, node_probabilities, path_lengths

__all__ = [
    "BranchingNodeDistribution",
    "LansitReport",
    "align_by_paths",
    "branching_node_distribution",
    "differential_lansit_check",
    "entropy_rate",
    "expected_path_length",
    "lansit_check",
    "leaf_entropy",
    "log_ratio_functional",
    "merged_increment_sum",
    "node_increment_sum",
    "normalized_divergence",
    "surprisal_functional",
    "tree_divergence",
]

NodeFunctional = Mapping[NodeId, object]

RESIDUAL_REL_TOL = 1e-9


@dataclass(frozen=True)
class LansitReport:
    """Both sides of the interchange identity plus their difference."""

    leaf_side: object
    node_side: object
    residual: object
    exact: bool

    def holds(self, rel_tol: float = RESIDUAL_REL_TOL) -> bool:
        if self.exact:
            return self.residual == 0
        scale = max(1.0, abs(float(self.leaf_side)))
        return abs(float(self.residual)) <= rel_tol * scale


@dataclass(frozen=True)
class BranchingNodeDistribution:
    """P_B(j) = Q_j / E[w(L)] over branching nodes, plus E[w(L)] itself."""

    mass: dict[NodeId, object]
    mean_length: object


def _require_complete(tree: Tree, f: NodeFunctional) -> None:
    missing = [n for n in tree.nodes if n not in f]
    if missing:
        raise FunctionalIncomplete(
            f"functional missing on {len(missing)} node(s), e.g. {missing[0]!r}"
        )


def _merge_order(tree: Tree) -> list[NodeId]:
    """Branching nodes deepest first; ties by preorder position."""
    depth = path_lengths(tree)
    index = {n: i for i, n in enumerate(tree.nodes)}
    return sorted(tree.branching_nodes, key=lambda j: (-depth[j], index[j]))


def _merged_terms(tree: Tree, f: NodeFunctional) -> Iterator[tuple[object, object]]:
    """Yield (Q_j, E[delta_f(S_j)]) by the leaf-merging contraction.

    Maintains the current leaf masses of the progressively contracted tree:
    each step recomputes Q_j from the masses of j's current children (all of
    which are leaves by the deepest-first order), then replaces the sibling
    set by j itself carrying mass Q_j.
    """
    mass = dict(tree.leaf_mass)
    for j in _merge_order(tree):
        kids = tree.children[j]
        qj = mass[kids[0][1]]
        for _, child in kids[1:]:
            qj = qj + mass[child]
        inner = 0
        for _, child in kids:
            inner = inner + (mass[child] / qj) * (f[child] - f[j])
        for _, child in kids:
            del mass[child]
        mass[j] = qj
        yield qj, inner


def merged_increment_sum(tree: Tree, f: NodeFunctional) -> object:
    """Node-side sum evaluated by repeated merging of deepest sibling sets."""
    total = 0
    for qj, inner in _merged_terms(tree, f):
        total = total + qj * inner
    return total


def node_increment_sum(
    tree: Tree, f: NodeFunctional, q: Mapping[NodeId, object] | None = None
) -> object:
    """Direct node-side sum from precomputed node probabilities.

    Walks branching nodes in the same order as the merging evaluation and
    performs the same divisions and additions, so the two results are
    identical, not merely close.
    """
    if q is None:
        q = node_probabilities(tree)
    total = 0
    for j in _merge_order(tree):
        qj = q[j]
        inner = 0
        for _, child in tree.children[j]:
            inner = inner + (q[child] / qj) * (f[child] - f[j])
        total = total + qj * inner
    return total


def lansit_check(tree: Tree, f: NodeFunctional) -> LansitReport:
    """Evaluate both sides of the interchange identity for a functional.

    leaf_side is sum of P_L(i) f(i) minus f(root); node_side comes from
    ``merged_increment_sum`` so every call exercises the constructive
    contraction argument.  Raises FunctionalIncomplete when f lacks a node.
    """
    _require_complete(tree, f)
    leaf_side = 0
    for leaf in tree.leaves:
        leaf_side = leaf_side + tree.leaf_mass[leaf] * f[leaf]
    leaf_side = leaf_side - f[tree.root]
    node_side = merged_increment_sum(tree, f)
    residual = leaf_side - node_side
    exact = tree.exact and not any(
        isinstance(f[n], float) for n in tree.nodes
    )
    return LansitReport(leaf_side, node_side, residual, exact)


def expected_path_length(tree: Tree) -> object:
    """E[w(L)] as the sum of branching-node probabilities.

    Equals the leaf-side average of path lengths.  A single-node tree has
    no branching nodes and yields 0; normalized quantities reject that case
    separately with DegenerateTree.
    """
    q = node_probabilities(tree)
    total = Fraction(0) if tree.exact else 0.0
    for j in tree.branching_nodes:
        total = total + q[j]
    return total


def leaf_entropy(tree: Tree) -> object:
    """H(P_L) in bits via the branch-sum: sum of Q_j H(P_{S_j}).

    Equals the direct leaf-side entropy -sum of P_L log2 P_L; exact mode
    returns an ExactLog2 value for which that equality is literal.
    """
    q = node_probabilities(tree)
    total = Fraction(0) if tree.exact else 0.0
    for j in tree.branching_nodes:
        qj = q[j]
        inner = 0
        for _, child in tree.children[j]:
            inner = inner + entropy_term(q[child] / qj, tree.exact)
        total = total + qj * inner
    return total


def align_by_paths(p: Tree, q: Tree) -> tuple[dict[NodeId, NodeId], bool]:
    """Match q's nodes onto p's by walking shared label paths.

    Returns (mapping from p node to q node, covered) where covered is False
    when q is missing structure that p has: a divergence of p from such a q
    is infinite, since positive p mass sits where q has none.  Structure
    present in q but absent from p violates the same-shape requirement and
    raises ShapeMismatch.
    """
    mapping = {p.root: q.root}
    covered = True
    stack = [(p.root, q.root)]
    while stack:
        pn, qn = stack.pop()
        q_by_label = {lab: c for lab, c in q.children[qn]}
        p_labels = {lab for lab, _ in p.children[pn]}
        extra = set(q_by_label) - p_labels
        if extra:
            raise ShapeMismatch(
                f"second tree has extra branch {sorted(map(repr, extra))[0]}"
                f" under path {p.path_of(pn)!r}"
            )
        for lab, pc in p.children[pn]:
            qc = q_by_label.get(lab)
            if qc is None:
                covered = False
            else:
                mapping[pc] = qc
                stack.append((pc, qc))
    return mapping, covered


def tree_divergence(p: Tree, q: Tree) -> object:
    """D(P_L || P_L') in bits via the branch-sum over aligned nodes.

    Trees are aligned by label paths.  Returns +inf when q lacks a branch
    that carries positive p mass; raises ShapeMismatch when q has branches
    p does not.  Equals the leaf-side sum of P_L log2(P_L/P_L').
    """
    mapping, covered = align_by_paths(p, q)
    if not covered:
        return math.inf
    exact = p.exact and q.exact
    qp = node_probabilities(p)
    qq = node_probabilities(q)
    total = Fraction(0) if exact else 0.0
    for j in p.branching_nodes:
        qj = qp[j]
        qjq = qq[mapping[j]]
        q_by_label = {lab: qq[c] for lab, c in q.children[mapping[j]]}
        inner = 0
        for lab, child in p.children[j]:
            inner = inner + kl_term(qp[child] / qj, q_by_label[lab] / qjq, exact)
        total = total + qj * inner
    return total


def branching_node_distribution(tree: Tree) -> BranchingNodeDistribution:
    """The length-biased distribution P_B(j) = Q_j / E[w(L)] over branching nodes."""
    if not tree.branching_nodes:
        raise DegenerateTree("single-node tree: no branching nodes")
    q = node_probabilities(tree)
    ew = expected_path_length(tree)
    mass = {j: q[j] / ew for j in tree.branching_nodes}
    return BranchingNodeDistribution(mass=mass, mean_length=ew)


def differential_lansit_check(tree: Tree, f: NodeFunctional) -> LansitReport:
    """Per-branch form of the interchange identity.

    leaf_side is (E[f(L)] - f(root)) / E[w(L)]; node_side averages the
    per-node increments under P_B.  With f = path length both sides are 1.
    """
    _require_complete(tree, f)
    if not tree.branching_nodes:
        raise DegenerateTree("single-node tree: no branching nodes")
    ew = expected_path_length(tree)
    leaf_side = 0
    for leaf in tree.leaves:
        leaf_side = leaf_side + tree.leaf_mass[leaf] * f[leaf]
    leaf_side = (leaf_side - f[tree.root]) / ew
    node_side = 0
    for qj, inner in _merged_terms(tree, f):
        node_side = node_side + (qj / ew) * inner
    residual = leaf_side - node_side
    exact = tree.exact and not any(
        isinstance(f[n], float) for n in tree.nodes
    )
    return LansitReport(leaf_side, node_side, residual, exact)


def entropy_rate(tree: Tree) -> object:
    """Bits per branch: the P_B-average of branching-node entropies.

    Equals H(P_L) / E[w(L)]; exactly so in exact mode.
    """
    dist = branching_node_distribution(tree)
    q = node_probabilities(tree)
    total = Fraction(0) if tree.exact else 0.0
    for j in tree.branching_nodes:
        qj = q[j]
        inner = 0
        for _, child in tree.children[j]:
            inner = inner + entropy_term(q[child] / qj, tree.exact)
        total = total + dist.mass[j] * inner
    return total


def normalized_divergence(p: Tree, q: Tree) -> object:
    """Bits per branch: the P_B-average of per-node divergences.

    P_B comes from p, the first argument.  Equals tree_divergence(p, q)
    divided by p's expected path length; +inf propagates from the
    unnormalized form when q fails to cover p's support.
    """
    if not p.branching_nodes:
        raise DegenerateTree("single-node tree: no branching nodes")
    mapping, covered = align_by_paths(p, q)
    if not covered:
        return math.inf
    exact = p.exact and q.exact
    qp = node_probabilities(p)
    qq = node_probabilities(q)
    ew = expected_path_length(p)
    total = Fraction(0) if exact else 0.0
    for j in p.branching_nodes:
        qj = qp[j]
        qjq = qq[mapping[j]]
        q_by_label = {lab: qq[c] for lab, c in q.children[mapping[j]]}
        inner = 0
        for lab, child in p.children[j]:
            inner = inner + kl_term(qp[child] / qj, q_by_label[lab] / qjq, exact)
        total = total + (qj / ew) * inner
    return total


def surprisal_functional(tree: Tree) -> dict[NodeId, object]:
    """f(j) = -log2 Q_j: its leaf average is H(P_L), its rate the entropy rate."""
    q = node_probabilities(tree)
    return {n: -log2_of(q[n], tree.exact) for n in tree.nodes}


def log_ratio_functional(p: Tree, q: Tree) -> dict[NodeId, object]:
    """f(j) = log2(Q_j / Q'_j) on p's nodes, aligning q by label paths.

    Its leaf average is D(P_L || P_L').  Raises ShapeMismatch when the two
    shapes differ in either direction, since a missing q node would make f
    infinite.
    """
    mapping, covered = align_by_paths(p, q)
    if not covered:
        raise ShapeMismatch("second tree does not cover the first; f would be infinite")
    qp = node_probabilities(p)
    qq = node_probabilities(q)
    exact = p.exact and q.exact
    out: dict[NodeId, object] = {}
    for n in p.nodes:
        ratio = qp[n] / qq[mapping[n]]
        out[n] = log2_of(Fraction(ratio), True) if exact else math.log2(ratio)
    return out
