"""Brute-force ground truth, independent of any determinant.

Covers are enumerated by backtracking over edges with residual vertex
capacities.  A cover's weight is the signed sum over half-edge colorings
of products of minors of the edge weights: the minor of an edge takes
rows from the colors at its white end and columns from the colors at its
black end, both in increasing order.  The per-vertex sign reads the colors
in cilium order (counterclockwise at black vertices, clockwise at white)
and multiplies the parities of the resulting words.

``cover_weight`` evaluates that sum by sweeping vertices with a frontier
state (color sets on edges whose other endpoint is still pending), which
is exact and avoids enumerating the full cartesian product of vertex
arrangements; ``enumerate_colorings`` still provides the raw product for
census checks.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .graph import BLACK, WHITE, EmbeddedGraph, GraphError
from .linalg import minor

DEFAULT_COVER_CAP = 10**6
DEFAULT_COLORING_CAP = 10**7


class EnumerationCapError(GraphError):
    pass


def enumerate_covers(g: EmbeddedGraph, cap: int = DEFAULT_COVER_CAP):
    """All cover multiplicity maps, duplicate-free, in deterministic order."""
    edge_ids = sorted(g.edges)
    res = {v.id: v.multiplicity for v in g.vertices.values()}
    rem = {v.id: v.degree for v in g.vertices.values()}
    # static per-edge capacity, for a cheap feasibility lookahead
    cap_of = {
        eid: min(
            g.vertices[g.edges[eid].white].multiplicity,
            g.vertices[g.edges[eid].black].multiplicity,
        )
        for eid in edge_ids
    }
    avail = {v.id: 0 for v in g.vertices.values()}
    for eid in edge_ids:
        e = g.edges[eid]
        avail[e.white] += cap_of[eid]
        avail[e.black] += cap_of[eid]
    out = []
    assign = {}

    def backtrack(pos: int):
        if pos == len(edge_ids):
            if all(r == 0 for r in res.values()):
                if len(out) >= cap:
                    raise EnumerationCapError(f"cover cap {cap} exceeded")
                out.append(dict(assign))
            return
        eid = edge_ids[pos]
        e = g.edges[eid]
        w, b = e.white, e.black
        rem[w] -= 1
        rem[b] -= 1
        avail[w] -= cap_of[eid]
        avail[b] -= cap_of[eid]
        lo = 0
        if rem[w] == 0:
            lo = max(lo, res[w])
        if rem[b] == 0:
            lo = max(lo, res[b])
        hi = min(res[w], res[b])
        for m in range(lo, hi + 1):
            if res[w] - m > avail[w] or res[b] - m > avail[b]:
                continue
            assign[eid] = m
            res[w] -= m
            res[b] -= m
            backtrack(pos + 1)
            res[w] += m
            res[b] += m
        assign.pop(eid, None)
        rem[w] += 1
        rem[b] += 1
        avail[w] += cap_of[eid]
        avail[b] += cap_of[eid]

    if g.vertices and not g.edges:
        return []  # vertices but nothing to cover them with
    backtrack(0)
    return out


def check_cover(g: EmbeddedGraph, cover: dict) -> bool:
    for v in g.vertices.values():
        if sum(cover.get(eid, 0) for eid in v.rotation) != v.multiplicity:
            return False
    return True


def _used_in_reading_order(g: EmbeddedGraph, vid: int, cover: dict):
    return [eid for eid in g.reading_order(vid) if cover.get(eid, 0) > 0]


def _word_sign(word) -> int:
    inv = 0
    for i in range(len(word)):
        for j in range(i + 1, len(word)):
            if word[i] > word[j]:
                inv += 1
    return -1 if inv % 2 else 1


def vertex_arrangements(g: EmbeddedGraph, vid: int, cover: dict):
    """All ways to deal colors 1..n_v to the used half-edges at one vertex.

    Yields ``(assignment, sign)`` where assignment maps edge id to the
    frozen color set on this vertex's side and sign is the parity of the
    word read in cilium order (each edge's colors in increasing order).
    """
    v = g.vertices[vid]
    used = _used_in_reading_order(g, vid, cover)
    mults = [cover[eid] for eid in used]
    if sum(mults) != v.multiplicity:
        raise GraphError(f"cover does not saturate vertex {vid}")
    results = []

    def deal(i: int, pool: tuple, acc):
        if i == len(used):
            word = []
            for eid in used:
                word.extend(sorted(acc[eid]))
            results.append((dict(acc), _word_sign(word)))
            return
        for combo in itertools.combinations(pool, mults[i]):
            acc[used[i]] = frozenset(combo)
            rest = tuple(x for x in pool if x not in combo)
            deal(i + 1, rest, acc)
            del acc[used[i]]

    deal(0, tuple(range(1, v.multiplicity + 1)), {})
    return results


def enumerate_colorings(g: EmbeddedGraph, cover: dict, cap: int = DEFAULT_COLORING_CAP):
    """All half-edge colorings of a cover as ``(coloring, sign)`` pairs.

    A coloring maps each used edge to ``(white_colors, black_colors)``.
    The full cartesian product across vertices; meant for census checks,
    not for weight evaluation (see ``cover_weight``).
    """
    per_vertex = [
        (vid, vertex_arrangements(g, vid, cover)) for vid in g.vertices
    ]
    total = 1
    for _, arrs in per_vertex:
        total *= len(arrs)
    if total > cap:
        raise EnumerationCapError(f"coloring cap {cap} exceeded ({total} colorings)")
    used_edges = [eid for eid, m in cover.items() if m > 0]
    out = []
    for choice in itertools.product(*[arrs for _, arrs in per_vertex]):
        sign = 1
        side = {}
        for (vid, _), (assignment, s) in zip(per_vertex, choice):
            sign *= s
            color = g.vertices[vid].color
            for eid, colors in assignment.items():
                side.setdefault(eid, {})[color] = colors
        coloring = {eid: (side[eid][WHITE], side[eid][BLACK]) for eid in used_edges}
        out.append((coloring, sign))
    return out


def coloring_term(g: EmbeddedGraph, coloring: dict, transpose_minors: bool = False):
    term = Fraction(1)
    for eid, (iw, jb) in coloring.items():
        wt = g.edges[eid].weight
        rows = [c - 1 for c in sorted(iw)]
        cols = [c - 1 for c in sorted(jb)]
        if transpose_minors:
            rows, cols = cols, rows
        term = term * minor(wt, rows, cols)
    return term


def cover_weight(
    g: EmbeddedGraph,
    cover: dict,
    transpose_minors: bool = False,
):
    """Weight of one cover: sum over colorings of sign times minor products.

    Evaluated with a frontier sweep over vertices; exact, and polynomial
    in the frontier width instead of the coloring count.

    ``transpose_minors`` deliberately swaps the row/column convention of
    the edge minors (a negative control: the determinant identity must
    then fail on non-symmetric weights).
    """
    order = list(g.vertices)
    pos = {vid: i for i, vid in enumerate(order)}
    states = {(): Fraction(1)}
    for vid in order:
        v = g.vertices[vid]
        arrangements = vertex_arrangements(g, vid, cover)
        new_states = {}
        for assignment, sign in arrangements:
            closing = []
            opening = []
            for eid, colors in assignment.items():
                e = g.edges[eid]
                other = e.other(vid)
                if pos[other] < pos[vid]:
                    closing.append((eid, colors))
                else:
                    opening.append((eid, colors))
            for key, acc in states.items():
                held = dict(key)
                term = acc * sign
                ok = True
                for eid, colors in closing:
                    e = g.edges[eid]
                    if v.color == WHITE:
                        iw, jb = colors, held.pop(eid)
                    else:
                        iw, jb = held.pop(eid), colors
                    rows = [c - 1 for c in sorted(iw)]
                    cols = [c - 1 for c in sorted(jb)]
                    if transpose_minors:
                        rows, cols = cols, rows
                    m = minor(g.edges[eid].weight, rows, cols)
                    if m == 0:
                        ok = False
                        break
                    term = term * m
                if not ok:
                    continue
                for eid, colors in opening:
                    held[eid] = colors
                new_key = tuple(sorted(held.items()))
                if new_key in new_states:
                    new_states[new_key] = new_states[new_key] + term
                else:
                    new_states[new_key] = term
        states = new_states
        if not states:
            return Fraction(0)
    if list(states.keys()) != [()]:
        raise GraphError("frontier not empty after sweep; invalid cover?")
    return states[()]


def oracle_cover_table(
    g: EmbeddedGraph,
    cap: int = DEFAULT_COVER_CAP,
    transpose_minors: bool = False,
):
    """(covers, weights, Z) by direct enumeration."""
    covers = enumerate_covers(g, cap=cap)
    weights = [cover_weight(g, w, transpose_minors=transpose_minors) for w in covers]
    z = Fraction(0)
    for w in weights:
        z = z + w
    return covers, weights, z


def oracle_partition(g: EmbeddedGraph, cap: int = DEFAULT_COVER_CAP, transpose_minors=False):
    """Z as the plain sum of cover weights (signed; |.| matches |det K|)."""
    _, _, z = oracle_cover_table(g, cap=cap, transpose_minors=transpose_minors)
    return z


def oracle_distribution(g: EmbeddedGraph, eid: int, cap: int = DEFAULT_COVER_CAP, table=None):
    """Exact pmf of one edge multiplicity as a list Pr[m = 0..n_b].

    Sized by the black-endpoint multiplicity to align with the
    probability-matrix route (P_e is n_b x n_b); entries beyond
    min(n_w, n_b) are structural zeros.
    """
    covers, weights, z = table if table is not None else oracle_cover_table(g, cap=cap)
    if z == 0:
        raise GraphError("oracle partition function is zero; no probability measure")
    e = g.edges[eid]
    n_e = g.vertices[e.black].multiplicity
    masses = [Fraction(0)] * (n_e + 1)
    for cover, w in zip(covers, weights):
        masses[cover.get(eid, 0)] = masses[cover.get(eid, 0)] + w
    return [m / z for m in masses]


def oracle_product_expectation(
    g: EmbeddedGraph, edge_ids, cap: int = DEFAULT_COVER_CAP, table=None
):
    """E[prod m_e] over the listed edges (repeats allowed: plain moments)."""
    covers, weights, z = table if table is not None else oracle_cover_table(g, cap=cap)
    if z == 0:
        raise GraphError("oracle partition function is zero; no probability measure")
    acc = Fraction(0)
    for cover, w in zip(covers, weights):
        prod = w
        for eid in edge_ids:
            prod = prod * cover.get(eid, 0)
        acc = acc + prod
    return acc / z


def oracle_moment(g: EmbeddedGraph, eid: int, power: int, cap: int = DEFAULT_COVER_CAP, table=None):
    covers, weights, z = table if table is not None else oracle_cover_table(g, cap=cap)
    if z == 0:
        raise GraphError("oracle partition function is zero; no probability measure")
    acc = Fraction(0)
    for cover, w in zip(covers, weights):
        acc = acc + w * cover.get(eid, 0) ** power
    return acc / z
