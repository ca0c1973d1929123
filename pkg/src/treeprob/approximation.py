"""Distribution distance, Pinsker bounds, and product-distribution matching.

Covers three layers.  Plain finite distributions get variational (L1)
distance and the classical bound D >= d^2 / (2 ln 2).  A product
assignment places one branching distribution at every internal node of a
shape, giving product node probabilities and a divergence from a tree's
actual leaf distribution to that product.  The per-branch Pinsker bound
then relates a tree pair's normalized divergence to the P_B-average of
squared branch distances, with exactly enumerated tail probabilities and
the Markov bound E[d]/eps as a cross-check.

Divergence to a product follows its definition as a plain leaf sum.  On
shapes that are not complete the product leaf values sum to less than one
and no normalization is applied, so the reported "divergence" can exceed
what a normalized reference distribution would give.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple

from .errors import (
    AlphabetMismatch,
    DegenerateTree,
    MassNotNormalized,
    NegativeMass,
    ParamsInvalid,
    UnknownLabel,
)
from .identities import (
    align_by_paths,
    branching_node_distribution,
    expected_path_length,
    normalized_divergence,
)
from .numeric import entropy_of, kl_term
from .tree import Label, NodeId, Tree, node_probabilities

__all__ = [
    "BoundedFunctional",
    "FiniteDistribution",
    "PinskerCheck",
    "PinskerTreeReport",
    "ProductSpec",
    "divergence_to_product",
    "entropy_functional",
    "entropy_rate_gap",
    "functional_convergence_gap",
    "pinsker_check",
    "product_branch_divergence",
    "product_node_probabilities",
    "tree_pinsker_report",
    "variational_distance",
]

MASS_SUM_TOLERANCE = 1e-9
PINSKER_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FiniteDistribution:
    """A probability mass function on a finite label set.

    Unlike tree leaves, zero masses are kept; distances and divergences
    between distributions with differing supports are meaningful.
    """

    mass: dict[Label, object]
    exact: bool = True

    def __post_init__(self):
        total = 0
        for label, m in self.mass.items():
            if m < 0:
                raise NegativeMass(f"label {label!r} has negative mass {m}")
            total = total + m
        if self.exact:
            if any(isinstance(m, float) for m in self.mass.values()):
                raise ParamsInvalid("exact distribution built from float masses")
            if total != 1:
                raise MassNotNormalized(f"masses sum to {total}, expected 1")
            object.__setattr__(
                self, "mass", {k: Fraction(v) for k, v in self.mass.items()}
            )
        elif abs(total - 1.0) > MASS_SUM_TOLERANCE:
            raise MassNotNormalized(f"masses sum to {total!r}, expected 1")

    @classmethod
    def from_mass(cls, mass: Mapping[Label, object]) -> "FiniteDistribution":
        exact = not any(isinstance(m, float) for m in mass.values())
        return cls(dict(mass), exact=exact)

    @property
    def alphabet(self) -> tuple[Label, ...]:
        return tuple(sorted(self.mass))

    def __getitem__(self, label: Label):
        return self.mass[label]

    def entropy(self) -> object:
        """Shannon entropy in bits, exact when the masses are."""
        return entropy_of(
            (self.mass[a] for a in self.alphabet), self.exact
        )

    def with_alphabet(self, labels: Iterable[Label]) -> "FiniteDistribution":
        """Zero-extend onto a superset alphabet (for union comparisons)."""
        extended = {lab: self.mass.get(lab, Fraction(0) if self.exact else 0.0)
                    for lab in labels}
        missing = set(self.mass) - set(extended)
        if missing:
            raise AlphabetMismatch(
                f"target alphabet drops labels {sorted(map(repr, missing))}"
            )
        return FiniteDistribution(extended, exact=self.exact)


def variational_distance(p: FiniteDistribution, q: FiniteDistribution) -> object:
    """L1 distance between mass functions; 0 iff equal, 2 iff disjoint supports."""
    if set(p.mass) != set(q.mass):
        raise AlphabetMismatch(
            f"alphabets differ: {p.alphabet!r} vs {q.alphabet!r}"
        )
    total = 0
    for label in p.alphabet:
        total = total + abs(p.mass[label] - q.mass[label])
    return total


class PinskerCheck(NamedTuple):
    divergence: object
    distance: object
    bound: float
    holds: bool


def pinsker_check(p: FiniteDistribution, q: FiniteDistribution) -> PinskerCheck:
    """Divergence, distance, and the lower bound d^2/(2 ln 2) with verdict.

    The bound is a theorem, so holds is True for every valid input; a False
    verdict signals an arithmetic bug, not a property of the data.
    """
    if set(p.mass) != set(q.mass):
        raise AlphabetMismatch(
            f"alphabets differ: {p.alphabet!r} vs {q.alphabet!r}"
        )
    exact = p.exact and q.exact
    divergence = 0
    for label in p.alphabet:
        term = kl_term(p.mass[label], q.mass[label], exact)
        if term == math.inf:
            divergence = math.inf
            break
        divergence = divergence + term
    distance = variational_distance(p, q)
    bound = float(distance) ** 2 / (2.0 * math.log(2.0))
    holds = float(divergence) >= bound - PINSKER_TOLERANCE
    return PinskerCheck(divergence, distance, bound, holds)


@dataclass(frozen=True)
class ProductSpec:
    """One branching distribution reused at every internal node of a shape."""

    base: FiniteDistribution

    def __post_init__(self):
        if any(m <= 0 for m in self.base.mass.values()):
            raise ParamsInvalid(
                "product assignment requires full support on its alphabet"
            )

    @classmethod
    def uniform(cls, labels: Iterable[Label]) -> "ProductSpec":
        labels = list(labels)
        mass = {lab: Fraction(1, len(labels)) for lab in labels}
        return cls(FiniteDistribution(mass, exact=True))

    @property
    def alphabet(self) -> tuple[Label, ...]:
        return self.base.alphabet

    @property
    def exact(self) -> bool:
        return self.base.exact


def product_node_probabilities(shape: Tree, spec: ProductSpec) -> dict[NodeId, object]:
    """Node probabilities when every internal node branches per the spec.

    The root gets 1 and each child multiplies by the spec mass of its edge
    label.  On complete shapes the leaf values form a distribution; on
    non-complete shapes they sum to less than one and are left as is.
    """
    one = Fraction(1) if spec.exact else 1.0
    qplus: dict[NodeId, object] = {shape.root: one}
    for node in shape.nodes:
        for label, child in shape.children[node]:
            if label not in spec.base.mass:
                raise UnknownLabel(
                    f"edge label {label!r} not in product alphabet {spec.alphabet!r}"
                )
            qplus[child] = qplus[node] * spec.base.mass[label]
    return qplus


def divergence_to_product(tree: Tree, spec: ProductSpec) -> object:
    """D(P_L || P+) in bits, the definition's plain sum over leaves.

    P+ is not normalized on non-complete shapes.  Agrees with the
    branch-sum form ``product_branch_divergence``.
    """
    qplus = product_node_probabilities(tree, spec)
    exact = tree.exact and spec.exact
    total = Fraction(0) if exact else 0.0
    for leaf in tree.leaves:
        total = total + kl_term(tree.leaf_mass[leaf], qplus[leaf], exact)
    return total


def product_branch_divergence(tree: Tree, spec: ProductSpec) -> object:
    """Same divergence as a Q-weighted sum of per-node divergences to the spec."""
    for label in tree.label_alphabet:
        if label not in spec.base.mass:
            raise UnknownLabel(
                f"edge label {label!r} not in product alphabet {spec.alphabet!r}"
            )
    q = node_probabilities(tree)
    exact = tree.exact and spec.exact
    total = Fraction(0) if exact else 0.0
    for j in tree.branching_nodes:
        qj = q[j]
        inner = 0
        for label, child in tree.children[j]:
            inner = inner + kl_term(q[child] / qj, spec.base.mass[label], exact)
        total = total + qj * inner
    return total


@dataclass(frozen=True)
class PinskerTreeReport:
    """Per-branch Pinsker diagnostics for a tree against a reference.

    ``tail`` maps each requested epsilon to the exact P_B mass of branching
    nodes whose branch distance reaches it.  ``holds`` records the bound
    normalized_divergence >= mean_sq_distance / (2 ln 2).
    """

    normalized_divergence: float
    mean_distance: float
    mean_sq_distance: float
    bound: float
    holds: bool
    tail: dict[float, float] = field(default_factory=dict)

    def markov_tail_bound(self, epsilon: float) -> float:
        """E[d]/epsilon, an upper bound on tail(epsilon) by Markov."""
        if epsilon <= 0:
            raise ParamsInvalid(f"epsilon must be positive, got {epsilon}")
        return self.mean_distance / epsilon


def _branch_distances(
    p: Tree, reference: "Tree | ProductSpec"
) -> tuple[dict[NodeId, object], object]:
    """Branch distance d(P_{S_j}, ref_j) per branching node, plus normalized divergence.

    For a tree reference, nodes align by label paths; structure missing
    from the reference counts as zero mass there (distance then includes
    the uncovered p mass, and the divergence is +inf).  For a product
    reference, every node compares against the one spec distribution over
    the full spec alphabet.
    """
    q = node_probabilities(p)
    exact_p = p.exact
    distances: dict[NodeId, object] = {}
    if isinstance(reference, ProductSpec):
        for label in p.label_alphabet:
            if label not in reference.base.mass:
                raise UnknownLabel(
                    f"edge label {label!r} not in product alphabet"
                    f" {reference.alphabet!r}"
                )
        zero = Fraction(0) if exact_p else 0.0
        for j in p.branching_nodes:
            qj = q[j]
            own = {lab: q[c] / qj for lab, c in p.children[j]}
            d = 0
            for lab in reference.alphabet:
                d = d + abs(own.get(lab, zero) - reference.base.mass[lab])
            distances[j] = d
        ew = expected_path_length(p)
        nd = product_branch_divergence(p, reference) / ew
        return distances, nd

    mapping, covered = align_by_paths(p, reference)
    qq = node_probabilities(reference)
    for j in p.branching_nodes:
        qj = q[j]
        own = [(lab, q[c] / qj) for lab, c in p.children[j]]
        counterpart = mapping.get(j)
        ref_kids = reference.children[counterpart] if counterpart is not None else ()
        ref = {lab: qq[c] / qq[counterpart] for lab, c in ref_kids}
        d = 0
        for lab, mass in own:
            d = d + abs(mass - ref.pop(lab, 0))
        for stray in ref.values():
            d = d + abs(stray)
        distances[j] = d
    nd = normalized_divergence(p, reference)
    return distances, nd


def tree_pinsker_report(
    p: Tree,
    q_or_spec: "Tree | ProductSpec",
    epsilons: Iterable[float] = (0.01, 0.1, 0.5, 1.0),
) -> PinskerTreeReport:
    """Check the per-branch Pinsker bound and enumerate distance tails.

    Tail probabilities are exact sums over the finite branching set, not
    estimates.  The Markov cross-check E[d]/eps is available from the
    report's ``markov_tail_bound``.
    """
    if not p.branching_nodes:
        raise DegenerateTree("single-node tree: no branching nodes")
    distances, nd = _branch_distances(p, q_or_spec)
    pb = branching_node_distribution(p).mass
    mean_d = 0
    mean_sq = 0
    for j in p.branching_nodes:
        mean_d = mean_d + pb[j] * distances[j]
        mean_sq = mean_sq + pb[j] * distances[j] * distances[j]
    tail: dict[float, float] = {}
    for eps in epsilons:
        total = 0
        for j in p.branching_nodes:
            if distances[j] >= eps:
                total = total + pb[j]
        tail[eps] = float(total)
    bound = float(mean_sq) / (2.0 * math.log(2.0))
    nd_float = float(nd)
    return PinskerTreeReport(
        normalized_divergence=nd_float,
        mean_distance=float(mean_d),
        mean_sq_distance=float(mean_sq),
        bound=bound,
        holds=nd_float >= bound - PINSKER_TOLERANCE,
        tail=tail,
    )


@dataclass(frozen=True)
class BoundedFunctional:
    """A real feature of branching distributions with a declared range bound.

    ``bound`` must dominate |evaluate(P) - evaluate(reference)| over the
    alphabet's simplex; it is declared, not derived, and ``spot_check``
    samples random distributions to catch gross misdeclarations.
    """

    evaluate: Callable[[FiniteDistribution], object]
    bound: float

    def spot_check(
        self, spec: ProductSpec, samples: int = 200, seed: int = 0
    ) -> bool:
        rng = random.Random(seed)
        center = float(self.evaluate(spec.base))
        labels = spec.alphabet
        for _ in range(samples):
            raw = [rng.random() for _ in labels]
            total = sum(raw)
            mass = {lab: x / total for lab, x in zip(labels, raw)}
            dist = FiniteDistribution(mass, exact=False)
            if abs(float(self.evaluate(dist)) - center) > self.bound + 1e-9:
                return False
        return True


def entropy_functional(alphabet: Iterable[Label]) -> BoundedFunctional:
    """g = Shannon entropy with the built-in bound log2 of alphabet size."""
    size = len(list(alphabet))
    if size < 1:
        raise ParamsInvalid("entropy functional needs a nonempty alphabet")
    return BoundedFunctional(
        evaluate=lambda dist: dist.entropy(), bound=math.log2(size) if size > 1 else 0.0
    )


def functional_convergence_gap(
    tree: Tree, spec: ProductSpec, g: BoundedFunctional
) -> float:
    """|E_{P_B}[g(P_{S_B})] - g(P_{S*})|, the per-branch feature gap.

    Branching distributions are zero-extended to the spec alphabet before
    evaluation so g sees one fixed domain.  Computed in exact arithmetic
    when the tree and spec allow it, so a gap of zero is reported as an
    exact 0.0 rather than rounding noise.
    """
    if not tree.branching_nodes:
        raise DegenerateTree("single-node tree: no branching nodes")
    for label in tree.label_alphabet:
        if label not in spec.base.mass:
            raise UnknownLabel(
                f"edge label {label!r} not in product alphabet {spec.alphabet!r}"
            )
    exact = tree.exact and spec.exact
    pb = branching_node_distribution(tree).mass
    q = node_probabilities(tree)
    zero = Fraction(0) if exact else 0.0
    average = 0
    for j in tree.branching_nodes:
        qj = q[j]
        own = {lab: q[c] / qj for lab, c in tree.children[j]}
        dist = FiniteDistribution(
            {lab: own.get(lab, zero) for lab in spec.alphabet}, exact=exact
        )
        average = average + pb[j] * g.evaluate(dist)
    diff = average - g.evaluate(spec.base)
    if diff == 0:
        return 0.0
    return abs(float(diff))


def entropy_rate_gap(tree: Tree, spec: ProductSpec) -> float:
    """Gap between the tree's entropy rate and the spec's entropy, in bits/branch."""
    return functional_convergence_gap(
        tree, spec, entropy_functional(spec.alphabet)
    )
