"""Worked model families: 2xN grids, snake graphs, six-vertex ice.

The grid generator is the workhorse: with per-column multiplicities and
arbitrary coupler shapes it also produces the single edge (N = 0), the
4-cycle (N = 1) and the mixed-multiplicity example.  Grid closed forms
(probability matrices and covariances through noncommutative continued
fractions) assume horizontal weights gauged to the identity; the
generator itself takes arbitrary weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graph import BLACK, WHITE, Edge, EmbeddedGraph, GraphError, Vertex
from .linalg import Matrix, det, inverse
from .moves import contract, gauge_certificate, parallel_reduce


# ---------------------------------------------------------------------------
# 2 x (N+1) grid
# ---------------------------------------------------------------------------


@dataclass
class GridSpec:
    """Weights for the 2x(N+1) grid: vertical b_0..b_N, horizontal a_1..a_N
    (sign +1) and c_1..c_N (sign -1 in the canonical connection)."""

    b: list
    a: list = None
    c: list = None

    def __post_init__(self):
        n_cols = len(self.b)
        if n_cols < 1:
            raise GraphError("grid needs at least one column")
        ns = []
        for i, m in enumerate(self.b):
            if not m.is_square():
                raise GraphError(f"vertical weight b_{i} must be square")
            ns.append(m.rows)
        self.ns = ns
        self.N = n_cols - 1
        if self.a is None:
            self.a = [_rect_identity(ns[i - 1], ns[i]) for i in range(1, n_cols)]
        if self.c is None:
            self.c = [_rect_identity(ns[i], ns[i - 1]) for i in range(1, n_cols)]
        if len(self.a) != self.N or len(self.c) != self.N:
            raise GraphError("need N horizontal weights of each kind")
        for i in range(1, n_cols):
            if self.a[i - 1].shape != (ns[i - 1], ns[i]):
                raise GraphError(f"a_{i} shape {self.a[i-1].shape} != ({ns[i-1]}, {ns[i]})")
            if self.c[i - 1].shape != (ns[i], ns[i - 1]):
                raise GraphError(f"c_{i} shape {self.c[i-1].shape} != ({ns[i]}, {ns[i-1]})")

    def uniform_n(self):
        return self.ns[0] if len(set(self.ns)) == 1 else None


def _rect_identity(rows: int, cols: int) -> Matrix:
    return Matrix(
        [[Fraction(1) if i == j else Fraction(0) for j in range(cols)] for i in range(rows)]
    )


def uniform_grid(N: int, n: int, b=None, a=None, c=None) -> GridSpec:
    ident = Matrix.identity(n)
    return GridSpec(
        b=list(b) if b is not None else [ident] * (N + 1),
        a=list(a) if a is not None else None,
        c=list(c) if c is not None else None,
    )


def grid_graph(spec: GridSpec) -> EmbeddedGraph:
    """Build the grid with the canonical connection (minus on c-edges).

    Column i has bottom vertex 2i and top vertex 2i+1; bottom is black for
    even i.  Edge ids: vertical v_i = 3i, a_i = 3i-2, c_i = 3i-1.  All
    cilia point away from the grid.
    """
    N = spec.N
    vertices = []
    edges = []
    labels = {}
    eps = {}

    def bottom(i):
        return 2 * i

    def top(i):
        return 2 * i + 1

    def white_of(i):
        return top(i) if i % 2 == 0 else bottom(i)

    def black_of(i):
        return bottom(i) if i % 2 == 0 else top(i)

    def v_id(i):
        return 3 * i

    def a_id(i):
        return 3 * i - 2

    def c_id(i):
        return 3 * i - 1

    def bottom_edge(j):  # between columns j-1, j
        return a_id(j) if j % 2 == 0 else c_id(j)

    def top_edge(j):
        return a_id(j) if j % 2 == 1 else c_id(j)

    for i in range(N + 1):
        w, b = white_of(i), black_of(i)
        edges.append(Edge(v_id(i), w, b, spec.b[i], label=f"v{i}"))
        labels[f"v{i}"] = v_id(i)
        eps[v_id(i)] = 1
    for j in range(1, N + 1):
        wa, ba = white_of(j - 1), black_of(j)
        edges.append(Edge(a_id(j), wa, ba, spec.a[j - 1], label=f"a{j}"))
        labels[f"a{j}"] = a_id(j)
        eps[a_id(j)] = 1
        wc, bc = white_of(j), black_of(j - 1)
        edges.append(Edge(c_id(j), wc, bc, spec.c[j - 1], label=f"c{j}"))
        labels[f"c{j}"] = c_id(j)
        eps[c_id(j)] = -1
    for i in range(N + 1):
        # bottom: ccw [right(0 deg), vertical(90), left(180)], cilium points down
        rot = []
        if i < N:
            rot.append(bottom_edge(i + 1))
        rot.append(v_id(i))
        if i > 0:
            rot.append(bottom_edge(i))
        color = BLACK if i % 2 == 0 else WHITE
        vertices.append(Vertex(bottom(i), color, spec.ns[i], tuple(rot), 0))
        # top: ccw [right(0), left(180), vertical(270)], cilium points up
        rot = []
        if i < N:
            rot.append(top_edge(i + 1))
        if i > 0:
            rot.append(top_edge(i))
        rot.append(v_id(i))
        color = WHITE if i % 2 == 0 else BLACK
        cil = 1 if i < N else 0
        vertices.append(Vertex(top(i), color, spec.ns[i], tuple(rot), cil))
    return EmbeddedGraph(
        vertices,
        edges,
        outer_witness=(v_id(0), BLACK),
        edge_labels=labels,
        connection=eps,
    )


def mixed_example(a: Matrix, b: Matrix, c: Matrix) -> EmbeddedGraph:
    """2x3 grid with column multiplicities 1, 2, 3 and truncation couplers."""
    if a.shape != (1, 1) or b.shape != (2, 2) or c.shape != (3, 3):
        raise GraphError("mixed example needs 1x1, 2x2, 3x3 vertical weights")
    return grid_graph(GridSpec(b=[a, b, c]))


# ---------------------------------------------------------------------------
# noncommutative continued fractions and grid closed forms
# ---------------------------------------------------------------------------


def continued_fraction(bs, i: int, j: int) -> Matrix:
    """F_{i,j}: nested B_i + (B_{i+-1} + (... + B_j^{-1})^{-1})^{-1}."""
    if i == j:
        return bs[i]
    step = 1 if j > i else -1
    m = bs[j]
    k = j - step
    while True:
        m = bs[k] + inverse(m)
        if k == i:
            return m
        k -= step


def _require_identity_couplers(spec: GridSpec):
    if spec.uniform_n() is None:
        raise GraphError("grid closed forms need uniform multiplicity")
    for m in list(spec.a) + list(spec.c):
        if not m.is_identity():
            raise GraphError("grid closed forms assume identity horizontal weights (gauge first)")


def grid_vertical_P(spec: GridSpec, i: int) -> Matrix:
    """Closed form (B_i^{-1} F_{i,N} + B_i^{-1} F_{i,0} - I)^{-1}."""
    _require_identity_couplers(spec)
    n = spec.uniform_n()
    binv = inverse(spec.b[i])
    f_right = continued_fraction(spec.b, i, spec.N)
    f_left = continued_fraction(spec.b, i, 0)
    return inverse(binv @ f_right + binv @ f_left - Matrix.identity(n))


def grid_horizontal_P(spec: GridSpec, gap: int, kind: str) -> Matrix:
    """Closed form for the horizontal edges across columns (gap, gap+1).

    kind "a" is the edge (w_gap, b_gap+1) with P = (I + F_{gap,0} F_{gap+1,N})^{-1};
    kind "c" is (w_gap+1, b_gap) with P = (I + F_{gap+1,N} F_{gap,0})^{-1}.
    """
    _require_identity_couplers(spec)
    if not 0 <= gap < spec.N:
        raise GraphError(f"gap {gap} out of range")
    n = spec.uniform_n()
    f_left = continued_fraction(spec.b, gap, 0)
    f_right = continued_fraction(spec.b, gap + 1, spec.N)
    if kind == "a":
        return inverse(Matrix.identity(n) + f_left @ f_right)
    if kind == "c":
        return inverse(Matrix.identity(n) + f_right @ f_left)
    raise GraphError("kind must be 'a' or 'c'")


def grid_covariance(spec: GridSpec, i: int, j: int):
    """Closed-form covariance of the multiplicities of vertical edges i < j.

    (-1)^(j-i+1) tr(P_i F_{i,0}^-1 .. F_{j-1,0}^-1 P_j F_{j,N}^-1 .. F_{i+1,N}^-1);
    the sign carries the covariance formula's overall minus through the
    alternating off-diagonal blocks of K^{-1}.
    """
    _require_identity_couplers(spec)
    if not 0 <= i < j <= spec.N:
        raise GraphError("need 0 <= i < j <= N")
    p_i = grid_vertical_P(spec, i)
    p_j = grid_vertical_P(spec, j)
    acc = p_i
    for k in range(i, j):
        acc = acc @ inverse(continued_fraction(spec.b, k, 0))
    acc = acc @ p_j
    for k in range(j, i, -1):
        acc = acc @ inverse(continued_fraction(spec.b, k, spec.N))
    tr = acc.trace()
    return -tr if (j - i) % 2 == 0 else tr


def grid_diag_inverse(spec: GridSpec, i: int) -> Matrix:
    """K^{[i],[i]} = (F_{i,N} + F_{i,0} - B_i)^{-1} for identity couplers."""
    _require_identity_couplers(spec)
    f_right = continued_fraction(spec.b, i, spec.N)
    f_left = continued_fraction(spec.b, i, 0)
    return inverse(f_right + f_left - spec.b[i])


# ---------------------------------------------------------------------------
# q-Fibonacci weighting
# ---------------------------------------------------------------------------


def q_fibonacci_polys(N: int, q: Matrix):
    """Matrix Fibonacci polynomials F_0..F_N with the parity-split recurrence.

    F_0 = F_1 = I; F_n = Q F_{n-1} + F_{n-2} for n even and
    F_n = F_{n-1} + Q^2 F_{n-2} for n odd.
    """
    n = q.rows
    ident = Matrix.identity(n)
    fs = [ident, ident]
    q2 = q @ q
    for m in range(2, N + 1):
        if m % 2 == 0:
            fs.append(q @ fs[m - 1] + fs[m - 2])
        else:
            fs.append(fs[m - 1] + q2 @ fs[m - 2])
    return fs[: N + 1]


def q_fibonacci_twin_polys(N: int, q: Matrix):
    """Twin family: the coefficient reversal Ftilde_n(q) = q^{n-1} F_n(1/q).

    Satisfies the parity-swapped recurrence with seeds Ftilde_1 = I and
    Ftilde_2 = I + Q (equivalently Ftilde_0 = Q^{-1}); all later terms are
    polynomials in Q.
    """
    if N < 1:
        raise GraphError("twin polynomials start at index 1")
    n = q.rows
    ident = Matrix.identity(n)
    fs = {1: ident, 2: ident + q}
    q2 = q @ q
    for m in range(3, N + 1):
        if m % 2 == 0:
            fs[m] = fs[m - 1] + q2 @ fs[m - 2]
        else:
            fs[m] = q @ fs[m - 1] + fs[m - 2]
    return [fs[m] for m in range(1, max(N, 1) + 1)]


def q_fibonacci_grid(N: int, q: Matrix):
    """Grid with A_{2i} = Q, A_{2i+1} = Q^{-1}, B = C = I, plus the exact
    expected multiplicity of the left-most vertical edge,
    tr(Q Ftilde_N(Q) F_{N+1}(Q)^{-1})."""
    if not q.is_square():
        raise GraphError("Q must be square")
    if det(q) == 0:
        raise GraphError("Q must be invertible")
    n = q.rows
    qinv = inverse(q)
    ident = Matrix.identity(n)
    a = [qinv if i % 2 == 1 else q for i in range(1, N + 1)]
    spec = GridSpec(b=[ident] * (N + 1), a=a, c=[ident] * N)
    g = grid_graph(spec)
    twins = q_fibonacci_twin_polys(max(N, 1), q)
    fs = q_fibonacci_polys(N + 1, q)
    value = (q @ twins[N - 1] @ inverse(fs[N + 1])).trace()
    return g, value


# ---------------------------------------------------------------------------
# snake graphs
# ---------------------------------------------------------------------------


def snake_graph(word: str, n: int = 1, weight_fn=None) -> EmbeddedGraph:
    """Snake of unit tiles glued east ("E") or north ("N").

    Vertices at integer corners, white when x + y is even.  Edges are
    labeled ``h{x}.{y}`` / ``v{x}.{y}`` by their lower-left endpoint;
    ``weight_fn(label, shape)`` supplies weights (identity by default).
    Cilia are placed on outer-face corners (all snake vertices lie on the
    outer boundary).
    """
    for ch in word:
        if ch not in ("E", "N"):
            raise GraphError(f"snake word must be over E/N, got {ch!r}")
    tiles = [(0, 0)]
    for ch in word:
        x, y = tiles[-1]
        tiles.append((x + 1, y) if ch == "E" else (x, y + 1))
    if len(set(tiles)) != len(tiles):
        raise GraphError("snake word revisits a tile")
    segments = {}
    for x, y in tiles:
        for seg, lab in (
            (((x, y), (x + 1, y)), f"h{x}.{y}"),
            (((x, y + 1), (x + 1, y + 1)), f"h{x}.{y + 1}"),
            (((x, y), (x, y + 1)), f"v{x}.{y}"),
            (((x + 1, y), (x + 1, y + 1)), f"v{x + 1}.{y}"),
        ):
            segments[seg] = lab
    points = sorted({p for seg in segments for p in seg}, key=lambda p: (p[1], p[0]))
    vid = {p: i for i, p in enumerate(points)}
    seg_list = sorted(segments)
    eid = {seg: i for i, seg in enumerate(seg_list)}

    def color(p):
        return WHITE if (p[0] + p[1]) % 2 == 0 else BLACK

    edges = []
    labels = {}
    for seg in seg_list:
        p1, p2 = seg
        wp, bp = (p1, p2) if color(p1) == WHITE else (p2, p1)
        lab = segments[seg]
        wt = (
            weight_fn(lab, (n, n))
            if weight_fn is not None
            else Matrix.identity(n)
        )
        edges.append(Edge(eid[seg], vid[wp], vid[bp], wt, label=lab))
        labels[lab] = eid[seg]
    vertices = []
    for p in points:
        x, y = p
        around = []
        for d, q in (((1, 0), (x + 1, y)), ((0, 1), (x, y + 1)), ((-1, 0), (x - 1, y)), ((0, -1), (x, y - 1))):
            seg = tuple(sorted([p, q]))
            if seg in eid:
                around.append(eid[seg])
        vertices.append(Vertex(vid[p], color(p), n, tuple(around), 0))
    x0, y0 = min(tiles, key=lambda t: (t[1], t[0]))
    bottom_seg = ((x0, y0), (x0 + 1, y0))
    witness_vertex = (x0 + 1, y0)
    g = EmbeddedGraph(
        vertices,
        edges,
        outer_witness=(eid[bottom_seg], color(witness_vertex)),
        edge_labels=labels,
    )
    outer = g.outer_face
    fixed = []
    for v in g.vertices.values():
        cil = v.cilium
        for c in range(v.degree):
            if g.face_of_corner(v.id, c) == outer:
                cil = c
                break
        fixed.append(Vertex(v.id, v.color, v.multiplicity, v.rotation, cil, v.label))
    return g.replace(vertices=fixed)


def snake_reduce(g: EmbeddedGraph):
    """Reduce a snake to a straight 2xM grid by gauge + contract + merge.

    Corner tiles are recognized as degree-2 vertices both of whose
    neighbors have degree >= 3; each elimination gauges the two corner
    edges to the identity, contracts, and merges the parallel pair that
    appears.  Returns the final graph and the certificate chain (gauge
    certificates have factor |det M|).
    """
    certs = []
    while True:
        apexes = [
            v.id
            for v in g.vertices.values()
            if v.degree == 2
            and all(
                g.vertices[g.edges[e].other(v.id)].degree >= 3 for e in v.rotation
            )
        ]
        if not apexes:
            return g, certs
        apex = min(apexes)
        for eid in list(g.vertices[apex].rotation):
            e = g.edges[eid]
            if not e.weight.is_identity():
                cert = gauge_certificate(g, e.other(apex), inverse(e.weight))
                g = cert.after
                certs.append(cert)
        g, cert = contract(g, apex)
        certs.append(cert)
        merged = cert.details["merged_into"]
        while True:
            by_pair = {}
            for eid in g.vertices[merged].rotation:
                e = g.edges[eid]
                by_pair.setdefault((e.white, e.black), []).append(eid)
            pair = next((k for k, v in by_pair.items() if len(v) >= 2), None)
            if pair is None:
                break
            g, cert = parallel_reduce(g, pair[0], pair[1])
            certs.append(cert)


# ---------------------------------------------------------------------------
# six-vertex model (square ice), free-fermionic weights
# ---------------------------------------------------------------------------

_DIRS = ("east", "north", "west", "south")


def direction_vectors(cos_t, sin_t):
    """Row vectors decorating the four edges around each oxygen vertex."""
    one = cos_t * 0 + 1
    zero = cos_t * 0
    return {
        "east": Matrix([[one, zero]]),
        "north": Matrix([[cos_t, sin_t]]),
        "west": Matrix([[zero, one]]),
        "south": Matrix([[-sin_t, cos_t]]),
    }


def boltzmann_weights(cos_t, sin_t):
    """The six vertex weights (a1, a2, b1, b2, c1, c2) as 2x2 minors."""
    v = direction_vectors(cos_t, sin_t)

    def pair(d1, d2):
        m = Matrix([v[d1].data[0], v[d2].data[0]])
        return det(m)

    return (
        pair("east", "north"),
        pair("west", "south"),
        pair("north", "west"),
        pair("east", "south"),
        pair("east", "west"),
        pair("north", "south"),
    )


def free_fermion_check(a1, a2, b1, b2, c1, c2) -> bool:
    """Exact test of c1 c2 = a1 a2 + b1 b2."""
    return c1 * c2 == a1 * a2 + b1 * b2


def six_vertex(rows: int, cols: int, cos_sin=(Fraction(3, 5), Fraction(4, 5))) -> EmbeddedGraph:
    """Square-ice lattice with domain-wall boundary as a mixed dimer model.

    Black (oxygen) vertices have multiplicity 2, white (hydrogen midpoint
    and boundary pendant) vertices 1.  Pendant whites sit on the left and
    right columns only, which forces rows == cols.  Every edge (w, b)
    carries the 1x2 direction row-vector of w as seen from b, and the
    connection is identically +1 (the direction vectors carry the signs).
    """
    if rows < 1 or cols < 1:
        raise GraphError("need rows, cols >= 1")
    if rows != cols:
        raise GraphError("domain-wall boundary needs rows == cols")
    c, s = cos_sin
    vecs = direction_vectors(c, s)
    black_id = {}
    for r in range(rows):
        for q in range(cols):
            black_id[(r, q)] = r * cols + q
    vertices = []
    next_vid = rows * cols
    white_at = {}  # key -> white vertex id

    def new_white(key):
        nonlocal next_vid
        white_at[key] = next_vid
        next_vid += 1
        return white_at[key]

    edges = []
    labels = {}
    eps = {}
    next_eid = 0
    # edge bookkeeping: per black, per direction
    incident = {b: {} for b in black_id.values()}
    white_edges = {}

    def add_edge(white, black, direction):
        nonlocal next_eid
        e = Edge(next_eid, white, black, vecs[direction])
        edges.append(e)
        eps[e.id] = 1
        incident[black][direction] = e.id
        white_edges.setdefault(white, {})[_opposite_point(direction)] = e.id
        next_eid += 1
        return e.id

    for r in range(rows):
        for q in range(cols):
            b = black_id[(r, q)]
            # west neighbor white (pendant or shared horizontal midpoint)
            if q == 0:
                w = new_white(("pend_w", r))
                add_edge(w, b, "west")
            else:
                w = white_at[("h", r, q - 1)]
                add_edge(w, b, "west")
            # north: vertical midpoint created by the row above
            if r > 0:
                w = white_at[("v", r - 1, q)]
                add_edge(w, b, "north")
            # east: new horizontal midpoint or right pendant
            if q == cols - 1:
                w = new_white(("pend_e", r))
                add_edge(w, b, "east")
            else:
                w = new_white(("h", r, q))
                add_edge(w, b, "east")
            # south: new vertical midpoint
            if r < rows - 1:
                w = new_white(("v", r, q))
                add_edge(w, b, "south")
    for (r, q), b in black_id.items():
        rot = tuple(incident[b][d] for d in _DIRS if d in incident[b])
        vertices.append(Vertex(b, BLACK, 2, rot, 0))
        for d, eid in incident[b].items():
            labels[f"b{r}.{q}-{d}"] = eid
    if rows == cols and rows % 2 == 1:
        mid = rows // 2
        for d, eid in incident[black_id[(mid, mid)]].items():
            labels[f"center-{d}"] = eid
    # whites: rotation ccw by direction toward each black
    for key, w in white_at.items():
        dirs = white_edges[w]
        order = [d for d in ("east", "north", "west", "south") if d in dirs]
        vertices.append(Vertex(w, WHITE, 1, tuple(dirs[d] for d in order), 0))
    witness_edge = incident[black_id[(0, 0)]]["west"]
    return EmbeddedGraph(
        vertices,
        edges,
        outer_witness=(witness_edge, WHITE),
        edge_labels=labels,
        connection=eps,
    )


def _opposite_point(direction: str) -> str:
    # direction of the black as seen from the white midpoint
    return {"east": "west", "west": "east", "north": "south", "south": "north"}[direction]


def six_vertex_closed_forms(cos_t, sin_t):
    """Central-vertex edge-use probabilities: east/west and north/south."""
    east = cos_t**4 + sin_t**4
    north = 2 * cos_t**2 * sin_t**2
    return east, north
