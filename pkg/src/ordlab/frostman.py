"""Finite mass distribution principle on a dyadic (a-adic) tree.

A cell at level k has side a^-k. The cheapest cover of the marked leaves by
cells, weighted by a gauge h, equals the largest mass that can be put on the
marked leaves with mu(Q) <= h(side(Q)) for every cell Q. The cover is found
by a bottom-up min/sum recursion; the mass by augmenting root-to-leaf paths,
which is an exact max-flow here because every leaf has a single path to the
root. The two routes share no code.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DomainError
from .scaling import GaugeSpec, gauge_log_eval

Node = tuple  # (level, index)


@dataclass(frozen=True)
class DyadicTree:
    depth: int
    marked: frozenset
    arity: int = 2

    def __post_init__(self):
        if self.depth < 1 or self.arity < 2:
            raise DomainError("need depth >= 1 and arity >= 2")
        m = frozenset(int(i) for i in self.marked)
        if not m:
            raise DomainError("at least one leaf must be marked")
        if min(m) < 0 or max(m) >= self.arity ** self.depth:
            raise DomainError("marked leaf index out of range")
        object.__setattr__(self, "marked", m)

    def side(self, level: int) -> float:
        return float(self.arity) ** -level

    def ancestor(self, leaf: int, level: int) -> int:
        return leaf // self.arity ** (self.depth - level)

    def spanned(self, level: int) -> list:
        """Sorted indices of level-``level`` cells containing a marked leaf."""
        return sorted({self.ancestor(i, level) for i in self.marked})

    def children(self, node: Node) -> list:
        k, i = node
        return [(k + 1, self.arity * i + c) for c in range(self.arity)]

    def node_label(self, node: Node) -> str:
        k, i = node
        digits = []
        for _ in range(k):
            i, d = divmod(i, self.arity)
            digits.append(str(d))
        return "/".join(["root"] + digits[::-1])

    def to_dict(self) -> dict:
        return {"depth": self.depth, "arity": self.arity, "marked": sorted(self.marked)}


def capacities(tree: DyadicTree, gauge: GaugeSpec) -> list:
    """h(side) at levels 0..depth."""
    return [math.exp(gauge_log_eval(gauge, tree.side(k))) for k in range(tree.depth + 1)]


def random_tree(depth: int, fraction: float, rng: np.random.Generator, arity: int = 2) -> DyadicTree:
    leaves = arity ** depth
    mask = rng.random(leaves) < fraction
    if not mask.any():
        mask[rng.integers(leaves)] = True
    return DyadicTree(depth, frozenset(np.flatnonzero(mask).tolist()), arity)


# -- min cover ------------------------------------------------------------------

@dataclass
class Cover:
    weight: float
    antichain: list


def min_cover_weight(tree: DyadicTree, gauge: GaugeSpec) -> Cover:
    """Cheapest antichain of cells covering the marked leaves."""
    h = capacities(tree, gauge)
    weight: dict = {}
    take: dict = {}
    for i in tree.spanned(tree.depth):
        weight[(tree.depth, i)] = h[tree.depth]
        take[(tree.depth, i)] = True
    for k in range(tree.depth - 1, -1, -1):
        for i in tree.spanned(k):
            below = math.fsum(weight[c] for c in tree.children((k, i)) if c in weight)
            take[(k, i)] = h[k] <= below
            weight[(k, i)] = min(h[k], below)
    chain, stack = [], [(0, 0)]
    while stack:
        node = stack.pop()
        if take[node]:
            chain.append(node)
        else:
            stack.extend(c for c in reversed(tree.children(node)) if c in weight)
    chain.sort()
    return Cover(weight[(0, 0)], chain)


def enumerate_covers(tree: DyadicTree) -> Iterator[list]:
    """Every minimal antichain covering the marked leaves (exponential; small trees)."""
    live = {(k, i) for k in range(tree.depth + 1) for i in tree.spanned(k)}

    def covers(node):
        yield [node]
        if node[0] == tree.depth:
            return
        kids = [c for c in tree.children(node) if c in live]
        combos = [[]]
        for c in kids:
            combos = [acc + sub for acc in combos for sub in covers(c)]
        yield from combos

    yield from covers((0, 0))


def is_covering_antichain(tree: DyadicTree, nodes) -> bool:
    nodes = list(nodes)
    for a in nodes:
        for b in nodes:
            if a != b and a[0] <= b[0] and tree.ancestor(b[1] * tree.arity ** (tree.depth - b[0]), a[0]) == a[1]:
                return False
    covered = set()
    for k, i in nodes:
        span = tree.arity ** (tree.depth - k)
        covered.update(range(i * span, (i + 1) * span))
    return tree.marked <= covered


def brute_force_cover_weight(tree: DyadicTree, gauge: GaugeSpec) -> float:
    h = capacities(tree, gauge)
    best = math.inf
    for chain in enumerate_covers(tree):
        if not is_covering_antichain(tree, chain):
            raise AssertionError(f"enumerated set is not a covering antichain: {chain}")
        best = min(best, math.fsum(h[k] for k, _ in chain))
    return best


# -- max flow -----------------------------------------------------------------------

@dataclass
class FrostmanSolution:
    total_mass: float
    leaf_masses: dict
    certificate: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "total_mass": self.total_mass,
            "leaf_masses": {str(k): v for k, v in sorted(self.leaf_masses.items())},
            "certificate": [list(n) for n in self.certificate],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrostmanSolution":
        return cls(float(d["total_mass"]), {int(k): float(v) for k, v in d["leaf_masses"].items()},
                   [tuple(n) for n in d.get("certificate", [])])


def max_frostman_mass(tree: DyadicTree, gauge: GaugeSpec) -> FrostmanSolution:
    """Largest leaf mass with mu(Q) <= h(side(Q)) for all cells Q.

    Marked leaves are processed in increasing order; each receives the
    bottleneck residual capacity along its path to the root. The certificate
    lists, for every leaf, the saturated cell on its path closest to the root.
    """
    h = capacities(tree, gauge)
    residual: dict = {}
    masses = {}
    for leaf in sorted(tree.marked):
        path = [(k, tree.ancestor(leaf, k)) for k in range(tree.depth + 1)]
        for node in path:
            residual.setdefault(node, h[node[0]])
        push = min(residual[node] for node in path)
        for node in path:
            residual[node] -= push
        masses[leaf] = push
    cert = set()
    for leaf in tree.marked:
        for k in range(tree.depth + 1):
            node = (k, tree.ancestor(leaf, k))
            if residual[node] == 0.0:
                cert.add(node)
                break
    return FrostmanSolution(math.fsum(masses.values()), masses, sorted(cert))


@dataclass
class VerifyReport:
    passed: bool
    feasible: bool
    optimal: bool
    violations: list = field(default_factory=list)  # (label, mass, capacity)
    duality_gap: float = 0.0
    messages: list = field(default_factory=list)


def frostman_verify(solution: FrostmanSolution, tree: DyadicTree, gauge: GaugeSpec,
                    tol: float = 1e-12) -> VerifyReport:
    """Re-check every cell constraint and the equality total = min cover weight."""
    h = capacities(tree, gauge)
    msgs, violations = [], []
    for leaf, m in solution.leaf_masses.items():
        if m < 0:
            violations.append((f"leaf {leaf}", m, 0.0))
        if leaf not in tree.marked and m != 0:
            violations.append((f"unmarked leaf {leaf}", m, 0.0))
    cell_mass: dict = {}
    for leaf, m in solution.leaf_masses.items():
        for k in range(tree.depth + 1):
            node = (k, tree.ancestor(leaf, k))
            cell_mass.setdefault(node, []).append(m)
    for node in sorted(cell_mass):
        mass = math.fsum(cell_mass[node])
        cap = h[node[0]]
        if mass > cap + tol * max(1.0, cap):
            violations.append((tree.node_label(node), mass, cap))
    total = math.fsum(solution.leaf_masses.values())
    if abs(total - solution.total_mass) > tol * max(1.0, total):
        msgs.append(f"leaf masses sum to {total!r}, reported total {solution.total_mass!r}")
    feasible = not violations and not msgs
    cover = min_cover_weight(tree, gauge).weight
    gap = cover - total
    optimal = abs(gap) <= tol * max(1.0, cover)
    if not optimal:
        msgs.append(f"suboptimal: total {total!r} vs min cover weight {cover!r}")
    if solution.certificate:
        cw = math.fsum(h[k] for k, _ in solution.certificate)
        if not is_covering_antichain(tree, solution.certificate):
            msgs.append("certificate is not a covering antichain")
        elif abs(cw - total) > tol * max(1.0, cw):
            msgs.append(f"certificate weight {cw!r} differs from total {total!r}")
    return VerifyReport(feasible and optimal and not msgs, feasible, optimal, violations, gap, msgs)


# -- instance files ---------------------------------------------------------------

def load_instance(path):
    with open(path) as fh:
        d = json.load(fh)
    tree = DyadicTree(int(d["depth"]), frozenset(d["marked"]), int(d.get("arity", 2)))
    return tree, GaugeSpec.from_dict(d["gauge"])


def instance_dict(tree: DyadicTree, gauge: GaugeSpec) -> dict:
    return {**tree.to_dict(), "gauge": gauge.to_dict()}
