"""Dense matrices generic over the three scalar backends.

Everything the statistics formulas need lives here: exact determinants and
inverses (pivoted Gaussian elimination over a field), a division-free
determinant for polynomial entries (Bird's algorithm), minors, Schur
complements in general position, and characteristic-polynomial
coefficients via Newton's identities.  Entries are whatever the scalar
backend supplies; no floating-point shortcuts are ever taken on exact
input.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import MPoly


class LinalgError(Exception):
    pass


class ShapeError(LinalgError):
    pass


class SingularMatrixError(LinalgError):
    pass


class Matrix:
    """Rectangular dense matrix, row-major, treated as immutable."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data):
        data = [list(row) for row in data]
        rows = len(data)
        cols = len(data[0]) if rows else 0
        for row in data:
            if len(row) != cols:
                raise ShapeError("ragged rows")
        self.rows = rows
        self.cols = cols
        self.data = data

    # -- constructors ----------------------------------------------------

    @staticmethod
    def identity(n: int) -> "Matrix":
        return Matrix(
            [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        )

    @staticmethod
    def zeros(rows: int, cols: int) -> "Matrix":
        return Matrix([[Fraction(0)] * cols for _ in range(rows)])

    @staticmethod
    def diag(entries) -> "Matrix":
        entries = list(entries)
        n = len(entries)
        out = [[Fraction(0)] * n for _ in range(n)]
        for i, x in enumerate(entries):
            out[i][i] = x
        return Matrix(out)

    @staticmethod
    def scalar(x) -> "Matrix":
        return Matrix([[x]])

    # -- basics ----------------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            self.data[i][j] == other.data[i][j]
            for i in range(self.rows)
            for j in range(self.cols)
        )

    def __hash__(self):
        return hash(tuple(tuple(row) for row in self.data))

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in row) for row in self.data)
        return f"Matrix[{body}]"

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_identity(self) -> bool:
        return self.is_square() and all(
            self.data[i][j] == (1 if i == j else 0)
            for i in range(self.rows)
            for j in range(self.cols)
        )

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def has_float(self) -> bool:
        return any(isinstance(x, float) for row in self.data for x in row)

    def has_poly(self) -> bool:
        return any(isinstance(x, MPoly) for row in self.data for x in row)

    def map(self, fn) -> "Matrix":
        return Matrix([[fn(x) for x in row] for row in self.data])

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if self.shape != other.shape:
            raise ShapeError(f"add {self.shape} vs {other.shape}")
        return Matrix(
            [
                [self.data[i][j] + other.data[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ShapeError(f"sub {self.shape} vs {other.shape}")
        return Matrix(
            [
                [self.data[i][j] - other.data[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def __neg__(self):
        return Matrix([[-x for x in row] for row in self.data])

    def __mul__(self, scalar):
        return Matrix([[x * scalar for x in row] for row in self.data])

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ShapeError(f"matmul {self.shape} vs {other.shape}")
        ocols = other.cols
        out = []
        for i in range(self.rows):
            arow = self.data[i]
            orow = []
            for j in range(ocols):
                acc = arow[0] * other.data[0][j] if self.cols else Fraction(0)
                for k in range(1, self.cols):
                    acc = acc + arow[k] * other.data[k][j]
                orow.append(acc)
            out.append(orow)
        return Matrix(out)

    def transpose(self) -> "Matrix":
        return Matrix([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def trace(self):
        if not self.is_square():
            raise ShapeError("trace of non-square matrix")
        if self.rows == 0:
            return Fraction(0)
        acc = self.data[0][0]
        for i in range(1, self.rows):
            acc = acc + self.data[i][i]
        return acc

    def submatrix(self, row_idx, col_idx) -> "Matrix":
        return Matrix([[self.data[i][j] for j in col_idx] for i in row_idx])

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ShapeError("hstack row mismatch")
        return Matrix([self.data[i] + other.data[i] for i in range(self.rows)])


def det(m: Matrix):
    """Exact determinant.

    Field entries (rationals, floats) use pivoted Gaussian elimination;
    polynomial entries use Bird's division-free elimination since the
    polynomial ring has no division.
    """
    if not m.is_square():
        raise ShapeError("determinant of non-square matrix")
    n = m.rows
    if n == 0:
        return Fraction(1)
    if m.has_poly():
        return _det_bird(m)
    a = [row[:] for row in m.data]
    use_abs = m.has_float()
    sign = 1
    acc = None
    for col in range(n):
        pivot = None
        if use_abs:
            best = 0.0
            for r in range(col, n):
                v = abs(a[r][col])
                if v > best:
                    best = v
                    pivot = r
        else:
            for r in range(col, n):
                if a[r][col] != 0:
                    pivot = r
                    break
        if pivot is None:
            return 0.0 if use_abs else Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            sign = -sign
        p = a[col][col]
        acc = p if acc is None else acc * p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f == 0:
                continue
            row = a[r]
            prow = a[col]
            for c in range(col, n):
                row[c] = row[c] - f * prow[c]
    return acc if sign == 1 else -acc


def _det_bird(m: Matrix):
    # X_{k+1} = mu(X_k) A, det = (-1)^{n-1} (X_{n-1})_{11}; only +,*,- used.
    n = m.rows
    a = m.map(MPoly.coerce)
    x = a
    for _ in range(n - 1):
        x = _bird_mu(x) @ a
    val = x.data[0][0]
    return val if n % 2 == 1 else -val


def _bird_mu(x: Matrix) -> Matrix:
    n = x.rows
    zero = MPoly.const(0)
    out = [[zero] * n for _ in range(n)]
    tail = zero
    diag = [zero] * n
    for i in range(n - 1, -1, -1):
        diag[i] = -tail
        tail = tail + x.data[i][i]
    for i in range(n):
        for j in range(i + 1, n):
            out[i][j] = x.data[i][j]
        out[i][i] = diag[i]
    return Matrix(out)


def inverse(m: Matrix) -> Matrix:
    """Exact inverse by Gauss-Jordan; raises SingularMatrixError."""
    if not m.is_square():
        raise ShapeError("inverse of non-square matrix")
    if m.has_poly():
        raise LinalgError("polynomial matrices are not invertible in the ring")
    n = m.rows
    a = [row[:] for row in m.data]
    one, zero = Fraction(1), Fraction(0)
    b = [[one if i == j else zero for j in range(n)] for i in range(n)]
    use_abs = m.has_float()
    for col in range(n):
        pivot = None
        if use_abs:
            best = 0.0
            for r in range(col, n):
                v = abs(a[r][col])
                if v > best:
                    best = v
                    pivot = r
        else:
            for r in range(col, n):
                if a[r][col] != 0:
                    pivot = r
                    break
        if pivot is None:
            raise SingularMatrixError(f"singular {n}x{n} matrix")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        b[col] = [v / p for v in b[col]]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f == 0:
                continue
            a[r] = [v - f * w for v, w in zip(a[r], a[col])]
            b[r] = [v - f * w for v, w in zip(b[r], b[col])]
    return Matrix(b)


def minor(m: Matrix, row_idx, col_idx):
    """Determinant of the submatrix on ``row_idx`` x ``col_idx``.

    The empty minor is 1 by convention.  Index sets are sorted before
    slicing, matching the "natural increasing order" convention for
    half-edge colors.
    """
    row_idx = sorted(row_idx)
    col_idx = sorted(col_idx)
    if len(row_idx) != len(col_idx):
        raise ShapeError("minor needs |I| = |J|")
    if not row_idx:
        return Fraction(1)
    if row_idx[-1] >= m.rows or col_idx[-1] >= m.cols or row_idx[0] < 0 or col_idx[0] < 0:
        raise ShapeError("minor index out of range")
    return det(m.submatrix(row_idx, col_idx))


def adjugate(m: Matrix) -> Matrix:
    """Cofactor transpose, division-free (works over polynomials)."""
    if not m.is_square():
        raise ShapeError("adjugate of non-square matrix")
    n = m.rows
    if n == 0:
        return m
    rows = list(range(n))
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = m.submatrix([r for r in rows if r != j], [c for c in rows if c != i])
            cof = det(sub)
            out[i][j] = cof if (i + j) % 2 == 0 else -cof
    return Matrix(out)


def schur(m: Matrix, block_rows, block_cols) -> Matrix:
    """Schur complement with respect to the square block D = m[I, J].

    Returns A - B D^{-1} C on the complementary rows and columns; general
    position is handled by index bookkeeping rather than explicit
    permutation matrices.
    """
    block_rows = sorted(block_rows)
    block_cols = sorted(block_cols)
    if len(block_rows) != len(block_cols):
        raise ShapeError("Schur block must be square")
    rest_rows = [i for i in range(m.rows) if i not in set(block_rows)]
    rest_cols = [j for j in range(m.cols) if j not in set(block_cols)]
    d = m.submatrix(block_rows, block_cols)
    a = m.submatrix(rest_rows, rest_cols)
    b = m.submatrix(rest_rows, block_cols)
    c = m.submatrix(block_rows, rest_cols)
    return a - b @ inverse(d) @ c


def char_coeffs(m: Matrix):
    """Elementary symmetric functions e_0..e_n of the eigenvalues.

    Computed from traces of powers via Newton's identities, entirely in
    the base field; no eigendecomposition.  det(I + t m) = sum e_k t^k.
    Unsupported for polynomial entries (the identities divide by 1..n).
    """
    if not m.is_square():
        raise ShapeError("char_coeffs of non-square matrix")
    if m.has_poly():
        raise LinalgError("char_coeffs is unsupported for the polynomial scalar")
    n = m.rows
    power = m
    ptr = []
    for _ in range(n):
        ptr.append(power.trace())
        power = power @ m
    es = [Fraction(1)]
    for k in range(1, n + 1):
        acc = None
        for i in range(1, k + 1):
            term = es[k - i] * ptr[i - 1]
            if i % 2 == 0:
                term = -term
            acc = term if acc is None else acc + term
        es.append(acc / k)
    return es


class BlockMatrix:
    """A flat matrix plus row/column block partitions."""

    __slots__ = ("row_sizes", "col_sizes", "mat", "_row_off", "_col_off")

    def __init__(self, row_sizes, col_sizes, mat: Matrix):
        self.row_sizes = list(row_sizes)
        self.col_sizes = list(col_sizes)
        if sum(self.row_sizes) != mat.rows or sum(self.col_sizes) != mat.cols:
            raise ShapeError("block sizes do not tile the matrix")
        self.mat = mat
        self._row_off = _offsets(self.row_sizes)
        self._col_off = _offsets(self.col_sizes)

    @staticmethod
    def from_blocks(grid) -> "BlockMatrix":
        """Assemble from a 2D list of Matrix blocks."""
        row_sizes = [grid[i][0].rows for i in range(len(grid))]
        col_sizes = [grid[0][j].cols for j in range(len(grid[0]))]
        data = []
        for i, brow in enumerate(grid):
            if [b.rows for b in brow] != [row_sizes[i]] * len(brow):
                raise ShapeError("inconsistent block heights")
            for r in range(row_sizes[i]):
                data.append([x for b in brow for x in b.data[r]])
        return BlockMatrix(row_sizes, col_sizes, Matrix(data))

    def block(self, i: int, j: int) -> Matrix:
        r0 = self._row_off[i]
        c0 = self._col_off[j]
        return self.mat.submatrix(
            range(r0, r0 + self.row_sizes[i]), range(c0, c0 + self.col_sizes[j])
        )

    def row_offset(self, i: int) -> int:
        return self._row_off[i]

    def col_offset(self, j: int) -> int:
        return self._col_off[j]


def _offsets(sizes):
    off = [0]
    for s in sizes:
        off.append(off[-1] + s)
    return off
