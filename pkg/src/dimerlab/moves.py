"""Gauge transformations and the four partition-function-preserving moves.

Each move returns the rewritten graph together with a certificate whose
factor relates the partition functions exactly: Z(after) = factor *
Z(before).  Leaf trimming, parallel reduction and contraction have factor
1 in their normal form (designated edges carrying the identity matrix);
the square move's factor is |det [[A, B], [-D, C]]| of the new weights.

Moves carry the sign connection across the rewrite instead of re-solving
blindly: contraction negates the signs on the merged-away vertex's other
edges (the Schur bookkeeping), and new cilia are chosen so the carried
connection stays face-valid.  That keeps both the determinant identity
and the enumeration oracle exact on either side of the move.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .graph import BLACK, WHITE, Edge, EmbeddedGraph, GraphError, Vertex
from .kasteleyn import assemble, connection_is_valid, flip_coboundary, solve_signs
from .linalg import BlockMatrix, Matrix, SingularMatrixError, det, inverse
from .statistics import probability_matrix


class MoveError(GraphError):
    pass


@dataclass
class MoveCertificate:
    kind: str  # leaf_trim | parallel_reduce | contract | square | gauge
    before: EmbeddedGraph
    after: EmbeddedGraph
    factor: object  # Z(after) = factor * Z(before)
    details: dict


def _abs(x):
    return -x if x < 0 else x


def _edit_rotation(rotation, cilium, remove, insert_at=None, insert=()):
    """Remove slots / insert edges; remap the cilium corner.

    The cilium sits just before slot ``cilium``; after the edit it sits
    just before the image of the first surviving slot >= cilium
    (cyclically), which keeps it in the same angular sector.
    """
    remove = set(remove)
    order = []
    for i, eid in enumerate(rotation):
        if insert_at is not None and i == insert_at:
            order.extend(("new", e) for e in insert)
        if i not in remove:
            order.append(("old", i, eid))
    if insert_at is not None and insert_at == len(rotation):
        order.extend(("new", e) for e in insert)
    new_rotation = tuple(item[-1] for item in order)
    new_index = {item[1]: k for k, item in enumerate(order) if item[0] == "old"}
    deg = len(rotation)
    new_cilium = 0
    for step in range(deg):
        cand = (cilium + step) % deg
        if cand in new_index:
            new_cilium = new_index[cand]
            break
    return new_rotation, new_cilium


def _transfer_witness(g: EmbeddedGraph, surviving_vertices, surviving_edges):
    """A dart of the old outer face that survives the rewrite."""
    if g.outer_witness is None:
        return None
    outer = g.faces[g.outer_face]
    for (vid, slot), eid in zip(outer.darts, outer.edge_ids):
        if vid in surviving_vertices and eid in surviving_edges:
            return (eid, g.vertices[vid].color)
    return None


def _current_eps(g: EmbeddedGraph, eps):
    if eps is not None:
        return dict(eps)
    if g.connection is not None:
        return dict(g.connection)
    return solve_signs(g)


def gauge(g: EmbeddedGraph, vertex_id: int, m: Matrix) -> EmbeddedGraph:
    """Multiply all weights at one vertex (left at white, right at black).

    Scales every cover weight, Z and det K by det(m); the probability
    measure and all P_e spectra are unchanged.
    """
    v = g.vertices.get(vertex_id)
    if v is None:
        raise MoveError(f"no vertex {vertex_id}")
    if m.shape != (v.multiplicity, v.multiplicity):
        raise MoveError(
            f"gauge matrix shape {m.shape} != multiplicity {v.multiplicity} at vertex {vertex_id}"
        )
    if det(m) == 0:
        raise SingularMatrixError("gauge matrix is singular")
    new_edges = []
    for e in g.edges.values():
        if v.color == BLACK and e.black == vertex_id:
            e = Edge(e.id, e.white, e.black, e.weight @ m, e.label)
        elif v.color == WHITE and e.white == vertex_id:
            e = Edge(e.id, e.white, e.black, m @ e.weight, e.label)
        new_edges.append(e)
    return g.with_edges(new_edges)


def gauge_certificate(g: EmbeddedGraph, vertex_id: int, m: Matrix) -> MoveCertificate:
    after = gauge(g, vertex_id, m)
    return MoveCertificate(
        kind="gauge",
        before=g,
        after=after,
        factor=_abs(det(m)),
        details={"vertex": vertex_id},
    )


def gauge_tree_to_identity(g: EmbeddedGraph, edge_ids, root: int):
    """Gauge the given spanning-tree edges to the identity, rootward first.

    Each tree edge is fixed by gauging at its child endpoint, which leaves
    already-fixed edges untouched.  Returns (graph, factor) with factor =
    product of |det| of the applied gauges (Z after = factor * Z before).
    """
    tree = set(edge_ids)
    adj = {}
    for eid in tree:
        e = g.edges[eid]
        adj.setdefault(e.white, []).append(eid)
        adj.setdefault(e.black, []).append(eid)
    factor = Fraction(1)
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for parent in frontier:
            for eid in adj.get(parent, []):
                child = g.edges[eid].other(parent)
                if child in seen:
                    continue
                seen.add(child)
                weight = g.edges[eid].weight
                if not weight.is_identity():
                    m = inverse(weight)
                    g = gauge(g, child, m)
                    factor = factor * _abs(det(m))
                nxt.append(child)
        frontier = nxt
    missing = tree - {eid for eid in tree if g.edges[eid].weight.is_identity()}
    if missing:
        raise MoveError(f"tree edges {sorted(missing)} not reachable from root {root}")
    return g, factor


def leaf_trim(g: EmbeddedGraph, edge_id: int):
    """Remove a pendant edge together with both endpoints.

    All other edges at the non-leaf endpoint disappear as well (its row
    of K is eliminated).  Factor is 1/|det W| for pendant weight W, which
    is 1 in the identity-weight normal form.
    """
    e = g.edges.get(edge_id)
    if e is None:
        raise MoveError(f"no edge {edge_id}")
    wdeg = g.vertices[e.white].degree
    bdeg = g.vertices[e.black].degree
    if bdeg == 1:
        leaf, center = e.black, e.white
    elif wdeg == 1:
        leaf, center = e.white, e.black
    else:
        raise MoveError(f"edge {edge_id} is not pendant (degrees {wdeg}, {bdeg})")
    if not e.weight.is_square():
        raise MoveError("pendant weight must be square to trim")
    d = det(e.weight)
    if d == 0:
        raise SingularMatrixError("pendant weight is singular")
    removed_edges = set(g.vertices[center].rotation)
    removed_vertices = {leaf, center}
    new_vertices = []
    for v in g.vertices.values():
        if v.id in removed_vertices:
            continue
        slots = [i for i, eid in enumerate(v.rotation) if eid in removed_edges]
        if slots:
            if len(slots) == v.degree:
                raise MoveError(f"trim would isolate vertex {v.id}")
            rot, cil = _edit_rotation(v.rotation, v.cilium, slots)
            v = Vertex(v.id, v.color, v.multiplicity, rot, cil, v.label)
        new_vertices.append(v)
    new_edges = [x for x in g.edges.values() if x.id not in removed_edges]
    eps = _current_eps(g, None) if g.connection is not None else None
    after = EmbeddedGraph(
        new_vertices,
        new_edges,
        outer_witness=_transfer_witness(
            g, set(g.vertices) - removed_vertices, set(g.edges) - removed_edges
        ),
        edge_labels={k: v for k, v in g.edge_labels.items() if v not in removed_edges},
        connection={k: v for k, v in eps.items() if k not in removed_edges} if eps else None,
    )
    factor = Fraction(1) if e.weight.is_identity() else 1 / _abs(d)
    return after, MoveCertificate(
        kind="leaf_trim",
        before=g,
        after=after,
        factor=factor,
        details={
            "edge": edge_id,
            "leaf": leaf,
            "center": center,
            "touched_vertices": removed_vertices,
        },
    )


def _consecutive_run(slots, degree):
    """Order cyclically-consecutive slots, or None if they are not a run."""
    slots = sorted(slots)
    k = len(slots)
    for start in slots:
        run = [(start + t) % degree for t in range(k)]
        if sorted(run) == slots:
            return run
    return None


def parallel_reduce(g: EmbeddedGraph, white: int, black: int, eps=None):
    """Merge all parallel edges between a pair into one summed edge.

    The kept edge's weight becomes eps(e_1) * sum_t eps(e_t) wt(e_t) and
    the carried connection keeps eps(e_1) on it, so the assembled K is
    literally unchanged (and with it Z and every probability matrix).
    The family must occupy consecutive rotation slots at both endpoints;
    cilia that sat inside the vanishing bigons are relocated, with a
    corner search keeping the carried connection face-valid.
    """
    family = g.parallel_family(white, black)
    if len(family) < 2:
        raise MoveError(f"fewer than 2 parallel edges between {white} and {black}")
    eps = _current_eps(g, eps)
    runs = {}
    for vid in (white, black):
        v = g.vertices[vid]
        slots = [g.slot_of(vid, eid) for eid in family]
        run = _consecutive_run(slots, v.degree)
        if run is None:
            raise MoveError(f"parallel edges are not rotation-consecutive at vertex {vid}")
        runs[vid] = run
    # keep the first edge of the run at the white endpoint
    order = [g.vertices[white].rotation[s] for s in runs[white]]
    keep = order[0]
    drop = [eid for eid in order[1:]]
    total = None
    for eid in order:
        contrib = g.edges[eid].weight * eps[eid]
        total = contrib if total is None else total + contrib
    new_weight = total * eps[keep]
    new_vertices = []
    dropset = set(drop)
    for v in g.vertices.values():
        if v.id in (white, black):
            slots = [i for i, eid in enumerate(v.rotation) if eid in dropset]
            rot, cil = _edit_rotation(v.rotation, v.cilium, slots)
            v = Vertex(v.id, v.color, v.multiplicity, rot, cil, v.label)
        new_vertices.append(v)
    old = g.edges[keep]
    new_edges = [
        Edge(keep, old.white, old.black, new_weight, old.label)
        if x.id == keep
        else x
        for x in g.edges.values()
        if x.id not in dropset
    ]
    witness = g.outer_witness
    if witness is not None and witness[0] in dropset:
        witness = (keep, witness[1])
    carried = {k: s for k, s in eps.items() if k not in dropset}
    after = EmbeddedGraph(
        new_vertices,
        new_edges,
        outer_witness=witness,
        edge_labels={k: v for k, v in g.edge_labels.items() if v not in dropset},
        connection=carried,
    )
    if not connection_is_valid(after, carried):
        fixed = _choose_valid_cilia(after, carried, [white, black])
        if fixed is None:
            raise MoveError(
                "no cilium placement keeps the carried connection face-valid"
            )
        after = fixed
    return after, MoveCertificate(
        kind="parallel_reduce",
        before=g,
        after=after,
        factor=Fraction(1),
        details={
            "white": white,
            "black": black,
            "kept": keep,
            "dropped": drop,
            "touched_vertices": {white, black},
        },
    )


def _choose_valid_cilia(g: EmbeddedGraph, eps, candidates):
    """Search cilium corners at the given vertices for face validity.

    Returns the graph with the first assignment under which the carried
    connection satisfies the bounded-face parity rule, or None.
    """
    ids = list(candidates)
    ranges = [range(g.vertices[vid].degree) for vid in ids]
    for combo in itertools.product(*ranges):
        verts = []
        for v in g.vertices.values():
            if v.id in ids:
                c = combo[ids.index(v.id)]
                v = Vertex(v.id, v.color, v.multiplicity, v.rotation, c, v.label)
            verts.append(v)
        trial = g.replace(vertices=verts)
        if connection_is_valid(trial, eps):
            return trial
    return None


def contract(g: EmbeddedGraph, center_id: int, eps=None):
    """Contract a degree-2 vertex with identity edges; merge its neighbors.

    The merged vertex keeps the second neighbor's id; signs on the first
    neighbor's surviving edges are negated (Schur bookkeeping), so det K
    is preserved by construction.  The two neighbors must be distinct;
    shared further neighbors are fine and simply produce parallel edges.
    """
    v = g.vertices.get(center_id)
    if v is None:
        raise MoveError(f"no vertex {center_id}")
    if v.degree != 2:
        raise MoveError(f"vertex {center_id} has degree {v.degree}, need 2")
    e1_id, e2_id = v.rotation
    e1, e2 = g.edges[e1_id], g.edges[e2_id]
    u1, u2 = e1.other(center_id), e2.other(center_id)
    if u1 == u2:
        raise MoveError("contraction with coincident neighbors is not supported")
    if not (e1.weight.is_identity() and e2.weight.is_identity()):
        raise MoveError("contraction edges must carry the identity (gauge first)")
    eps = _current_eps(g, eps)
    vu1, vu2 = g.vertices[u1], g.vertices[u2]
    # rotation splice: u1's edges after e1, then u2's edges after e2 (ccw)
    s1 = g.slot_of(u1, e1_id)
    s2 = g.slot_of(u2, e2_id)
    part1 = [vu1.rotation[(s1 + t) % vu1.degree] for t in range(1, vu1.degree)]
    part2 = [vu2.rotation[(s2 + t) % vu2.degree] for t in range(1, vu2.degree)]
    merged_rot = tuple(part1 + part2)
    if not merged_rot:
        raise MoveError("contraction would isolate the merged vertex")
    merged = Vertex(u2, vu2.color, vu2.multiplicity, merged_rot, 0, vu2.label)
    removed_edges = {e1_id, e2_id}
    new_eps = {}
    new_edges = []
    # Schur bookkeeping: the merged row/column is row(u2) - s1 s2 row(u1),
    # so u1's surviving edges pick up the factor -eps(e1) eps(e2)
    twist = -eps[e1_id] * eps[e2_id]
    flipped = set(part1)
    for e in g.edges.values():
        if e.id in removed_edges:
            continue
        s = eps[e.id]
        if e.id in flipped:
            s = s * twist
        if e.white == u1:
            e = Edge(e.id, u2, e.black, e.weight, e.label)
        elif e.black == u1:
            e = Edge(e.id, e.white, u2, e.weight, e.label)
        new_edges.append(e)
        new_eps[e.id] = s
    new_vertices = [merged if w.id == u2 else w for w in g.vertices.values() if w.id not in (center_id, u1)]
    after = EmbeddedGraph(
        new_vertices,
        new_edges,
        outer_witness=_transfer_witness(
            g, set(g.vertices) - {center_id, u1}, set(g.edges) - removed_edges
        ),
        edge_labels={k: x for k, x in g.edge_labels.items() if x not in removed_edges},
        connection=new_eps,
    )
    fixed = _choose_valid_cilia(after, new_eps, [u2])
    if fixed is None:
        # never hand back a graph whose carried connection the face rule rejects
        raise MoveError("no merged-vertex cilium keeps the carried connection face-valid")
    after = fixed
    return after, MoveCertificate(
        kind="contract",
        before=g,
        after=after,
        factor=Fraction(1),
        details={
            "center": center_id,
            "merged_into": u2,
            "absorbed": u1,
            "touched_vertices": {center_id, u1, u2},
        },
    )


def square_move(g: EmbeddedGraph, face_id: int, eps=None):
    """The square (urban renewal / spider) move on a bounded quad face.

    Colors on the face swap; each original vertex is pushed outward and
    joined to its replacement by an identity pendant; the new weights are
    A = (a + d c^-1 b)^-1 and cyclic variants, read off the signed blocks
    so the move works with whatever valid connection the graph carries.
    Z multiplies by |det [[A, B], [-D, C]]|.
    """
    faces = g.faces
    if face_id < 0 or face_id >= len(faces):
        raise MoveError(f"no face {face_id}")
    face = faces[face_id]
    if face.is_outer:
        raise MoveError("square move needs a bounded face")
    if face.num_darts != 4 or len(set(face.edge_ids)) != 4:
        raise MoveError("square move needs a quadrilateral face with 4 distinct edges")
    verts_on_face = [vid for vid, _ in face.darts]
    if len(set(verts_on_face)) != 4:
        raise MoveError("square move needs 4 distinct corner vertices")
    eps = _current_eps(g, eps)
    # start the dart walk at a white corner: edges then read a, b, c, d
    start = next(i for i, vid in enumerate(verts_on_face) if g.vertices[vid].color == WHITE)
    darts = face.darts[start:] + face.darts[:start]
    eids = face.edge_ids[start:] + face.edge_ids[:start]
    w_tl, b_bl, w_br, b_tr = (vid for vid, _ in darts)
    ea, eb, ec, ed = eids
    mults = {g.vertices[x].multiplicity for x in (w_tl, b_bl, w_br, b_tr)}
    if len(mults) != 1:
        raise MoveError("square move needs equal multiplicities on the face")
    n = mults.pop()
    # normalize by a coboundary so the face signs read (+, +, +, -) along
    # the walk; this keeps the carried connection face-valid after the move
    want = [eps[ea] < 0, eps[eb] < 0, eps[ec] < 0, eps[ed] > 0]
    f_tl = 0
    f_bl = f_tl ^ want[0]
    f_br = f_bl ^ want[1]
    f_tr = f_br ^ want[2]
    if (f_tr ^ f_tl) != want[3]:
        raise MoveError("face sign product is not -1; invalid connection for a square move")
    flips = [v for v, f in zip((w_tl, b_bl, w_br, b_tr), (f_tl, f_bl, f_br, f_tr)) if f]
    eps = flip_coboundary(eps, g, flips)
    a_p = g.edges[ea].weight * eps[ea]
    b_p = g.edges[eb].weight * eps[eb]
    c_p = g.edges[ec].weight * eps[ec]
    d_p = g.edges[ed].weight * (-eps[ed])
    try:
        na = inverse(a_p + d_p @ inverse(c_p) @ b_p)
        nb = inverse(b_p + c_p @ inverse(d_p) @ a_p)
        nc = inverse(c_p + b_p @ inverse(a_p) @ d_p)
        nd = inverse(d_p + a_p @ inverse(b_p) @ c_p)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"square move needs invertible weights: {exc}") from exc
    next_vid = max(g.vertices) + 1
    next_eid = max(g.edges) + 1
    inner_of = {}
    for vid in (w_tl, b_bl, w_br, b_tr):
        old = g.vertices[vid]
        inner_of[vid] = Vertex(
            next_vid,
            BLACK if old.color == WHITE else WHITE,
            n,
            (),  # rotation filled below
            0,
        )
        next_vid += 1
    pend = {}
    for vid in (w_tl, b_bl, w_br, b_tr):
        outer_v = g.vertices[vid]
        inner_v = inner_of[vid]
        white_id = outer_v.id if outer_v.color == WHITE else inner_v.id
        black_id = inner_v.id if outer_v.color == WHITE else outer_v.id
        pend[vid] = Edge(next_eid, white_id, black_id, Matrix.identity(n))
        next_eid += 1
    ia = Edge(next_eid, inner_of[b_bl].id, inner_of[w_tl].id, na)
    ib = Edge(next_eid + 1, inner_of[b_bl].id, inner_of[w_br].id, nb)
    ic = Edge(next_eid + 2, inner_of[b_tr].id, inner_of[w_br].id, nc)
    idd = Edge(next_eid + 3, inner_of[b_tr].id, inner_of[w_tl].id, nd)
    quad_edges = {ea, eb, ec, ed}
    new_eps = {eid: s for eid, s in eps.items() if eid not in quad_edges}
    # pendant at original whites: +1; at new whites: -1; inner D-edge: -1
    new_eps[pend[w_tl].id] = 1
    new_eps[pend[w_br].id] = 1
    new_eps[pend[b_bl].id] = -1
    new_eps[pend[b_tr].id] = -1
    new_eps[ia.id] = 1
    new_eps[ib.id] = 1
    new_eps[ic.id] = 1
    new_eps[idd.id] = -1
    # inner rotations, ccw, from the Table-1 picture
    def with_rot(v: Vertex, rot):
        return Vertex(v.id, v.color, v.multiplicity, tuple(rot), v.cilium, v.label)

    inner_vertices = [
        with_rot(inner_of[w_tl], [idd.id, pend[w_tl].id, ia.id]),
        with_rot(inner_of[b_bl], [ib.id, ia.id, pend[b_bl].id]),
        with_rot(inner_of[w_br], [ic.id, ib.id, pend[w_br].id]),
        with_rot(inner_of[b_tr], [pend[b_tr].id, idd.id, ic.id]),
    ]
    new_vertices = []
    for v in g.vertices.values():
        if v.id in inner_of:
            quad_slots = sorted(
                g.slot_of(v.id, eid) for eid in v.rotation if eid in quad_edges
            )
            run = _consecutive_run(quad_slots, v.degree)
            if run is None:
                raise MoveError(f"quad edges not adjacent in rotation at vertex {v.id}")
            rot, cil = _edit_rotation(
                v.rotation, v.cilium, quad_slots, insert_at=min(run), insert=[pend[v.id].id]
            )
            v = Vertex(v.id, v.color, v.multiplicity, rot, cil, v.label)
        new_vertices.append(v)
    new_vertices.extend(inner_vertices)
    new_edges = [e for e in g.edges.values() if e.id not in quad_edges]
    new_edges.extend([pend[w_tl], pend[b_bl], pend[w_br], pend[b_tr], ia, ib, ic, idd])
    witness = _transfer_witness(g, set(g.vertices), set(g.edges) - quad_edges)
    if witness is None:
        # the whole graph was the quad; the outer face zigzags the pendants
        witness = (pend[w_tl].id, WHITE)
    after = EmbeddedGraph(
        new_vertices,
        new_edges,
        outer_witness=witness,
        edge_labels={k: x for k, x in g.edge_labels.items() if x not in quad_edges},
        connection=new_eps,
    )
    fixed = _choose_valid_cilia(after, new_eps, [v.id for v in inner_vertices])
    if fixed is None:
        raise MoveError("no inner-vertex cilia keep the carried connection face-valid")
    after = fixed
    factor_mat = BlockMatrix.from_blocks([[na, nb], [-nd, nc]]).mat
    factor = _abs(det(factor_mat))
    return after, MoveCertificate(
        kind="square",
        before=g,
        after=after,
        factor=factor,
        details={
            "face": face_id,
            "new_weights": {"A": na, "B": nb, "C": nc, "D": nd},
            "frame": {"a": a_p, "b": b_p, "c": c_p, "d": d_p},
            "pendants": {vid: pend[vid].id for vid in pend},
            "touched_vertices": {w_tl, b_bl, w_br, b_tr}
            | {v.id for v in inner_vertices},
        },
    )


def verify_move_invariance(g: EmbeddedGraph, g2: EmbeddedGraph, edge_ids, eps=None, eps2=None):
    """Check P_e equality across a move for edges untouched by it."""
    sys1 = assemble(g, eps)
    sys2 = assemble(g2, eps2)
    report = {}
    for eid in edge_ids:
        p1 = probability_matrix(sys1, eid)
        p2 = probability_matrix(sys2, eid)
        report[eid] = p1 == p2
    report["pass"] = all(v for k, v in report.items() if k != "pass")
    return report
