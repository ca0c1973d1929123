"""Random tree generation and product-matching convergence sweeps.

Two constructions feed the test suites and experiments.  The random
generator produces arbitrary validated trees from a seeded pseudo-random
stream, for property suites.  The matcher grows a complete tree toward a
target branching distribution: it repeatedly expands the leaf with the
largest product probability, then sets the leaf masses to the dyadic
quantization of the product leaf probabilities, so every leaf mass is a
power of two and the masses sum to one exactly.  Sweeping the matcher over
growing leaf budgets demonstrates the decay of normalized divergence and
of the entropy-rate gap toward the target.

All randomness comes from ``random.Random`` seeded explicitly; the
algorithm identifier below names that generator so results can be
reproduced bit for bit elsewhere.  The matcher itself uses no randomness.
"""

from __future__ import annotations

import csv
import heapq
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Sequence

from .approximation import ProductSpec, entropy_rate_gap, tree_pinsker_report
from .errors import ParamsInvalid
from .identities import entropy_rate, expected_path_length
from .tree import Label, Tree, build_tree

__all__ = [
    "GENERATOR_ALGORITHM",
    "GeneratorParams",
    "SWEEP_CSV_COLUMNS",
    "SweepRow",
    "convergence_sweep",
    "dyadic_quantization",
    "generate_random_tree",
    "grow_matcher_tree",
    "write_sweep_csv",
]

GENERATOR_ALGORITHM = "python-random-mt19937"

SWEEP_CSV_COLUMNS = (
    "leaf_count",
    "mean_length",
    "normalized_divergence_bits_per_branch",
    "entropy_rate_bits_per_branch",
    "entropy_rate_gap",
    "tail_probability",
)


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for the random tree generator; same params and seed, same tree."""

    alphabet_size: int
    max_depth: int
    branching_probability: float
    seed: int

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ParamsInvalid(
                f"alphabet size must be at least 2, got {self.alphabet_size}"
            )
        if self.max_depth < 1:
            raise ParamsInvalid(f"max depth must be at least 1, got {self.max_depth}")
        if not 0.0 <= self.branching_probability <= 1.0:
            raise ParamsInvalid(
                f"branching probability must lie in [0, 1],"
                f" got {self.branching_probability}"
            )


def generate_random_tree(params: GeneratorParams, exact: bool = True) -> Tree:
    """A validated random tree, deterministic given the seed.

    The root always branches; deeper nodes branch with the configured
    probability until the depth cap.  Each branching node draws a random
    nonempty subset of the alphabet as child labels.  Leaf masses are an
    exchangeable random point on the simplex: integer weights in exact
    mode, exponential draws in float mode, normalized either way.  All
    masses are positive, so validation prunes nothing.
    """
    rng = random.Random(params.seed)
    edges: list[tuple[int, Label, int]] = []
    leaves: list[int] = []
    next_id = 1
    stack: list[tuple[int, int]] = [(0, 0)]
    while stack:
        node, depth = stack.pop()
        branch = depth == 0 or (
            depth < params.max_depth
            and rng.random() < params.branching_probability
        )
        if not branch:
            leaves.append(node)
            continue
        width = rng.randint(1, params.alphabet_size)
        labels = sorted(rng.sample(range(params.alphabet_size), width))
        for label in labels:
            child = next_id
            next_id += 1
            edges.append((node, label, child))
            stack.append((child, depth + 1))
    if exact:
        weights = [rng.randint(1, 1000) for _ in leaves]
        total = sum(weights)
        mass = {leaf: Fraction(w, total) for leaf, w in zip(leaves, weights)}
    else:
        draws = [rng.expovariate(1.0) for _ in leaves]
        total = sum(draws)
        mass = {leaf: x / total for leaf, x in zip(leaves, draws)}
    return build_tree(edges, mass, exact=exact)


def dyadic_quantization(
    targets: Sequence[tuple[tuple[Label, ...], Fraction]]
) -> dict[tuple[Label, ...], Fraction]:
    """Round positive rationals summing to 1 down to powers of two, then
    promote largest remainders until the total is exactly 1 again.

    Each target p gets the largest power of two not exceeding it.  The
    leftover deficit is returned to the leaves greedily: among leaves whose
    current mass still fits inside the deficit, double the one with the
    largest remainder (target minus current mass), breaking ties by path
    order.  Every mass is a power of two, so the deficit always stays a
    multiple of the smallest mass; while it is positive the smallest-mass
    leaf fits, hence the loop terminates with deficit zero.
    """
    masses: dict[tuple[Label, ...], Fraction] = {}
    heap: list[tuple[Fraction, tuple[Label, ...]]] = []
    total = Fraction(0)
    for path, p in targets:
        if p <= 0:
            raise ParamsInvalid(f"target mass must be positive, got {p} at {path!r}")
        # smallest k with 2^k >= 1/p, via integers only
        t = -((-p.denominator) // p.numerator)
        level = (t - 1).bit_length()
        m = Fraction(1, 1 << level)
        masses[path] = m
        total += m
        heap.append((m - p, path))
    deficit = Fraction(1) - total
    if deficit < 0:
        raise ParamsInvalid(
            "quantized masses already exceed 1; targets must sum to at most 1"
        )
    heapq.heapify(heap)
    while deficit > 0:
        if not heap:
            raise AssertionError("dyadic promotion ran out of candidates")
        neg_remainder, path = heapq.heappop(heap)
        m = masses[path]
        if m > deficit:
            # deficit only shrinks, so this leaf can never fit again
            continue
        masses[path] = m * 2
        deficit -= m
        target = m - neg_remainder
        heapq.heappush(heap, (masses[path] - target, path))
    return masses


def grow_matcher_tree(spec: ProductSpec, leaf_budget: int) -> Tree:
    """Greedy complete tree aimed at a product target, dyadic leaf masses.

    Starting from a bare root, repeatedly replace the leaf of largest
    product probability with a full set of children (one per spec label)
    while the leaf count stays within budget; ties go to the
    lexicographically smallest label path.  Leaf masses are then the dyadic
    quantization of the product probabilities, which keeps the tree exactly
    normalized and the construction fully deterministic.
    """
    if not spec.exact:
        raise ParamsInvalid("matcher requires an exact (rational) target")
    labels = spec.alphabet
    width = len(labels)
    if leaf_budget < width:
        raise ParamsInvalid(
            f"leaf budget {leaf_budget} is below the alphabet size {width}"
        )
    edges: list[tuple[int, Label, int]] = []
    next_id = 1
    # heap of current leaves keyed by (-Q+, path); paths are unique
    heap: list[tuple[Fraction, tuple[Label, ...], int]] = [
        (Fraction(-1), (), 0)
    ]
    count = 1
    while count + (width - 1) <= leaf_budget:
        neg_q, path, node = heapq.heappop(heap)
        for label in labels:
            child = next_id
            next_id += 1
            edges.append((node, label, child))
            heapq.heappush(
                heap, (neg_q * spec.base.mass[label], path + (label,), child)
            )
        count += width - 1
    leaf_rows = sorted(
        ((path, -neg_q, node) for neg_q, path, node in heap),
        key=lambda row: row[0],
    )
    quantized = dyadic_quantization([(path, q) for path, q, _ in leaf_rows])
    leaf_mass = {node: quantized[path] for path, _, node in leaf_rows}
    return build_tree(edges, leaf_mass, exact=True)


@dataclass(frozen=True)
class SweepRow:
    """One matcher budget's metrics, all in float for reporting."""

    leaf_count: int
    mean_length: float
    normalized_divergence: float
    entropy_rate: float
    entropy_rate_gap: float
    max_tail: float


def convergence_sweep(
    spec: ProductSpec, budgets: Sequence[int], epsilon: float
) -> list[SweepRow]:
    """Grow one matcher tree per budget and report its per-branch metrics.

    Budgets must be strictly increasing and must produce strictly
    increasing leaf counts, so the sweep is a genuine tree sequence.
    ``max_tail`` is the P_B probability of a branch distance of at least
    epsilon.
    """
    budgets = list(budgets)
    if not budgets:
        raise ParamsInvalid("no budgets given")
    if any(b >= a for b, a in zip(budgets, budgets[1:])):
        raise ParamsInvalid(f"budgets must be strictly increasing: {budgets}")
    if epsilon <= 0:
        raise ParamsInvalid(f"epsilon must be positive, got {epsilon}")
    rows: list[SweepRow] = []
    prev_leaves = 0
    for budget in budgets:
        tree = grow_matcher_tree(spec, budget)
        leaf_count = len(tree.leaves)
        if leaf_count <= prev_leaves:
            raise ParamsInvalid(
                f"budget {budget} repeats the previous leaf count {prev_leaves};"
                f" spread the budgets further apart"
            )
        prev_leaves = leaf_count
        report = tree_pinsker_report(tree, spec, [epsilon])
        rows.append(
            SweepRow(
                leaf_count=leaf_count,
                mean_length=float(expected_path_length(tree)),
                normalized_divergence=report.normalized_divergence,
                entropy_rate=float(entropy_rate(tree)),
                entropy_rate_gap=entropy_rate_gap(tree, spec),
                max_tail=report.tail[epsilon],
            )
        )
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], out: IO[str]) -> None:
    """Write sweep rows with the fixed column order and round-trip floats.

    Floats are rendered as Python's shortest round-trip decimals, so the
    same rows always produce byte-identical output.
    """
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.leaf_count,
                str(row.mean_length),
                str(row.normalized_divergence),
                str(row.entropy_rate),
                str(row.entropy_rate_gap),
                str(row.max_tail),
            ]
        )
