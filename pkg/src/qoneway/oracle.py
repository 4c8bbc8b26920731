"""Exact deterministic one-way cost of small partial functions.

Two rows conflict when some column is defined in both with different values.
A deterministic one-way protocol must give conflicting rows different
messages, so the minimum number of messages is the chromatic number of the
conflict graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .protocol import PartialFunction

DEFAULT_EXACT_LIMIT = 20


@dataclass(frozen=True)
class ConflictGraph:
    vertices: int
    edges: frozenset  # of (x, x') with x < x'

    def neighbours(self) -> list[set]:
        adj = [set() for _ in range(self.vertices)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def components(self) -> list[list[int]]:
        adj = self.neighbours()
        seen = [False] * self.vertices
        comps = []
        for start in range(self.vertices):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps


def distinct_rows(f: PartialFunction) -> ConflictGraph:
    v = f.values
    ones = (v == 1).astype(np.int32)
    zeros = (v == 0).astype(np.int32)
    clash = (ones @ zeros.T) + (zeros @ ones.T)
    xs, ys = np.nonzero(np.triu(clash, k=1))
    return ConflictGraph(f.x_count, frozenset(zip(xs.tolist(), ys.tolist())))


def _greedy_clique(adj: list[set], order: list[int]) -> list[int]:
    clique: list[int] = []
    for v in order:
        if all(v in adj[u] for u in clique):
            clique.append(v)
    return clique


def _dsatur_greedy(adj: list[set], nodes: list[int]) -> dict:
    colour: dict = {}
    while len(colour) < len(nodes):
        v = max(
            (u for u in nodes if u not in colour),
            key=lambda u: (len({colour[w] for w in adj[u] if w in colour}), len(adj[u]), -u),
        )
        used = {colour[w] for w in adj[v] if w in colour}
        colour[v] = next(c for c in range(len(nodes)) if c not in used)
    return colour


def _exact_colouring(adj: list[set], nodes: list[int]) -> dict:
    """Branch and bound over DSATUR order, pruned by a greedy clique bound."""
    if not nodes:
        return {}
    best = _dsatur_greedy(adj, nodes)
    best_k = max(best.values()) + 1
    by_degree = sorted(nodes, key=lambda u: -len(adj[u]))
    lower = len(_greedy_clique(adj, by_degree))
    if lower == best_k:
        return best
    colour: dict = {}

    def pick():
        return max(
            (u for u in nodes if u not in colour),
            key=lambda u: (len({colour[w] for w in adj[u] if w in colour}), len(adj[u]), -u),
        )

    def search(used: int):
        nonlocal best, best_k
        if used >= best_k:
            return
        if len(colour) == len(nodes):
            best, best_k = dict(colour), used
            return
        v = pick()
        forbidden = {colour[w] for w in adj[v] if w in colour}
        for c in range(min(used + 1, best_k - 1)):
            if c in forbidden:
                continue
            colour[v] = c
            search(max(used, c + 1))
            del colour[v]
            if best_k == lower:
                return

    search(0)
    return best


@dataclass(frozen=True)
class OracleResult:
    chromatic_number: int
    exact: bool
    colouring: dict

    @property
    def bits(self) -> int:
        return math.ceil(math.log2(self.chromatic_number)) if self.chromatic_number > 1 else 0


def exact_one_way_cost(f: PartialFunction, limit: int = DEFAULT_EXACT_LIMIT) -> OracleResult:
    """Minimum number of deterministic messages and its bit cost.

    Colouring is done per connected component of the conflict graph; a
    component larger than ``limit`` is coloured greedily and the result is
    flagged as an upper bound (``exact=False``).
    """
    g = distinct_rows(f)
    adj = g.neighbours()
    colouring: dict = {}
    exact = True
    chi = 1
    for comp in g.components():
        if len(comp) > limit:
            part = _dsatur_greedy(adj, comp)
            exact = False
        else:
            part = _exact_colouring(adj, comp)
        colouring.update(part)
        chi = max(chi, max(part.values()) + 1)
    return OracleResult(chi, exact, colouring)


def row_classes(f: PartialFunction) -> int:
    """Number of distinct row patterns (meaningful as a cost only for total functions)."""
    return len({row.tobytes() for row in f.values})


@dataclass(frozen=True)
class Counterexample:
    x: int
    y: int
    expected: int
    got: int


def validate_compiled(det, f: PartialFunction) -> tuple[bool, Counterexample | None]:
    """Exhaustively compare ``det.bob_output(det.message(x), y)`` with ``f`` on defined cells.

    ``det`` may be any object with ``message(x)`` and ``bob_decisions(message)``
    (or ``bob_output(message, y)``).
    """
    for x in range(f.x_count):
        msg = det.message(x)
        if hasattr(det, "bob_decisions"):
            out = det.bob_decisions(msg)
            lookup = out.__getitem__
        else:
            lookup = lambda y, msg=msg: det.bob_output(msg, y)  # noqa: E731
        for y in f.defined_columns(x):
            got = int(lookup(y))
            if got != f(x, y):
                return False, Counterexample(x, y, f(x, y), got)
    return True, None


def conflicts_respected(colouring: dict, g: ConflictGraph) -> bool:
    return all(colouring[a] != colouring[b] for a, b in g.edges)

