"""Kasteleyn sign connections and the block Kasteleyn matrix.

The sign connection is an edge weighting by +-1 whose product around each
bounded face with 2l edges and k inward cilia is (-1)^(l-1+k) when the
uniform multiplicity is even and (-1)^(l-1) when it is odd.  The outer
face is never constrained.  Solving is GF(2) elimination with one bit per
edge and one equation per bounded face; free edges are set to +1, so the
solution is deterministic for a fixed graph.

For mixed multiplicities the parity rule is not settled here; the odd rule
is applied as a heuristic, callers may supply their own connection, and
the enumeration oracle certifies either way.
"""

from __future__ import annotations

from .graph import EmbeddedGraph, GraphError
from .linalg import BlockMatrix, Matrix, SingularMatrixError, det, inverse


class SignSolveError(GraphError):
    pass


def face_sign_target(face, even_rule: bool) -> int:
    """Required parity bit for one bounded face (1 means product = -1)."""
    if face.num_darts % 2 != 0:
        raise SignSolveError(f"face {face.id} has odd length; graph not bipartite?")
    ell = face.num_darts // 2
    k = face.inward_cilia if even_rule else 0
    return (ell - 1 + k) % 2


def solve_signs(g: EmbeddedGraph, even_rule=None) -> dict:
    """A Kasteleyn connection from the face parity rule.

    ``even_rule`` defaults to the parity of the uniform multiplicity;
    mixed graphs fall back to the odd rule (heuristic, oracle-certified).
    """
    if even_rule is None:
        n = g.uniform_multiplicity()
        even_rule = n is not None and n % 2 == 0
    edge_ids = sorted(g.edges)
    col = {eid: i for i, eid in enumerate(edge_ids)}
    nvars = len(edge_ids)
    # rows as bitmasks: low nvars bits = coefficients, bit nvars = rhs
    rows = []
    for face in g.bounded_faces():
        mask = 0
        for eid in face.edge_ids:
            mask ^= 1 << col[eid]
        rhs = face_sign_target(face, even_rule)
        rows.append(mask | (rhs << nvars))
    pivots = {}
    for row in rows:
        for c in range(nvars):
            if not (row >> c) & 1:
                continue
            if c in pivots:
                row ^= pivots[c]
            else:
                pivots[c] = row
                row = 0
                break
        if row:  # all coefficients eliminated, rhs stayed 1
            raise SignSolveError("face parity system infeasible; invalid embedding")
    # back-substitute with free variables = 0 (sign +1)
    x = [0] * nvars
    for c in sorted(pivots, reverse=True):
        row = pivots[c]
        val = (row >> nvars) & 1
        for c2 in range(c + 1, nvars):
            if (row >> c2) & 1:
                val ^= x[c2]
        x[c] = val
    return {eid: (-1 if x[col[eid]] else 1) for eid in edge_ids}


def connection_is_valid(g: EmbeddedGraph, eps: dict, even_rule=None) -> bool:
    if even_rule is None:
        n = g.uniform_multiplicity()
        even_rule = n is not None and n % 2 == 0
    for face in g.bounded_faces():
        prod = 1
        for eid in face.edge_ids:
            prod *= eps[eid]
        if prod != (-1) ** face_sign_target(face, even_rule):
            return False
    return True


def flip_coboundary(eps: dict, g: EmbeddedGraph, flip_vertices) -> dict:
    """Another valid connection: flip all edges at the given vertices.

    Any two valid connections differ by such a coboundary, so this is the
    canonical way to produce distinct sign solutions for invariance tests.
    """
    flip = set(flip_vertices)
    out = {}
    for e in g.edges.values():
        s = eps[e.id]
        if e.white in flip:
            s = -s
        if e.black in flip:
            s = -s
        out[e.id] = s
    return out


class KasteleynSystem:
    """Assembled block Kasteleyn matrix with cached inverse and |det|."""

    def __init__(self, g: EmbeddedGraph, eps: dict):
        self.graph = g
        self.eps = dict(eps)
        self.white_order = g.white_ids()
        self.black_order = g.black_ids()
        self._wpos = {w: i for i, w in enumerate(self.white_order)}
        self._bpos = {b: j for j, b in enumerate(self.black_order)}
        row_sizes = [g.vertices[w].multiplicity for w in self.white_order]
        col_sizes = [g.vertices[b].multiplicity for b in self.black_order]
        grid = [
            [Matrix.zeros(rs, cs) for cs in col_sizes] for rs in row_sizes
        ]
        for e in g.edges.values():
            i = self._wpos[e.white]
            j = self._bpos[e.black]
            grid[i][j] = grid[i][j] + e.weight * self.eps[e.id]
        if row_sizes and col_sizes:
            self.K = BlockMatrix.from_blocks(grid)
        else:
            self.K = BlockMatrix([], [], Matrix([]))
        self._det = None
        self._kinv = None

    # -- lookups -----------------------------------------------------------

    def edge_block(self, eid: int) -> Matrix:
        """Signed weight of one edge (not summed over parallels)."""
        e = self.graph.edges[eid]
        return e.weight * self.eps[eid]

    def white_pos(self, white_id: int) -> int:
        return self._wpos[white_id]

    def black_pos(self, black_id: int) -> int:
        return self._bpos[black_id]

    def k_block(self, white_id: int, black_id: int) -> Matrix:
        return self.K.block(self._wpos[white_id], self._bpos[black_id])

    def det(self):
        if self._det is None:
            self._det = det(self.K.mat)
        return self._det

    def partition_function(self):
        """|det K| (exact absolute value on the rational backend)."""
        d = self.det()
        return -d if d < 0 else d

    def inverse(self) -> BlockMatrix:
        """K^{-1} as a block matrix (rows: black vertices, cols: white)."""
        if self._kinv is None:
            try:
                inv = inverse(self.K.mat)
            except SingularMatrixError as exc:
                raise SingularMatrixError("Kasteleyn matrix is singular") from exc
            self._kinv = BlockMatrix(self.K.col_sizes, self.K.row_sizes, inv)
        return self._kinv

    def block_inverse(self, white_id: int, black_id: int) -> Matrix:
        """Block of K^{-1} in black row [j], white column [i]."""
        return self.inverse().block(self._bpos[black_id], self._wpos[white_id])


def assemble(g: EmbeddedGraph, eps: dict | None = None, even_rule=None) -> KasteleynSystem:
    """Build the Kasteleyn system.

    Connection precedence: explicit ``eps``, then the graph's own carried
    connection (generators and moves set one), then a fresh sign solve.
    """
    if eps is None:
        eps = g.connection
    if eps is None:
        eps = solve_signs(g, even_rule=even_rule)
    else:
        missing = set(g.edges) - set(eps)
        if missing:
            raise GraphError(f"connection missing edges {sorted(missing)}")
    return KasteleynSystem(g, eps)


def partition_function(sys: KasteleynSystem):
    return sys.partition_function()
