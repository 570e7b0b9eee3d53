"""Block-tridiagonal Kasteleyn matrices and matrix continued fractions.

On the 2 x (N+1) grid with vertical weights B_i and identity horizontals,
the blocks of K^{-1} are built from the nested expression
[B_i, ..., B_j] = B_i + (B_{i+1} + ( ... + B_j^{-1})^{-1})^{-1}.
Closed forms for probability matrices and covariances drop out, and a
q-deformation of the Fibonacci ratio appears on a special weighting.
"""

import random
from fractions import Fraction

from dimerlab import Matrix, assemble, covariance, expected_multiplicity, probability_matrix
from dimerlab.linalg import det, inverse
from dimerlab.zoo import (
    continued_fraction,
    grid_covariance,
    grid_graph,
    grid_vertical_P,
    q_fibonacci_grid,
    uniform_grid,
)


def rnd(rng, n):
    while True:
        m = Matrix([[Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n)] for _ in range(n)])
        if det(m) != 0:
            return m


rng = random.Random(3)
N, n = 4, 2
while True:
    spec = uniform_grid(N, n, b=[rnd(rng, n) for _ in range(N + 1)])
    try:
        for i in range(N + 1):
            grid_vertical_P(spec, i)
        break
    except Exception:
        continue

g = grid_graph(spec)
sys = assemble(g)

print("== K^[0][0] is the inverse of a matrix continued fraction ==")
e0 = g.edges[g.edge_labels["v0"]]
lhs = sys.block_inverse(e0.white, e0.black)
rhs = inverse(continued_fraction(spec.b, 0, N))
print("  equal exactly:", lhs == rhs)

print()
print("== closed-form probability matrices vs direct block inversion ==")
for i in range(N + 1):
    closed = grid_vertical_P(spec, i)
    direct = probability_matrix(sys, g.edge_labels[f"v{i}"])
    print(f"  vertical edge {i}: match = {closed == direct}, tr = {closed.trace()}")

print()
print("== closed-form covariances match the generic route ==")
for j in range(1, N + 1):
    closed = grid_covariance(spec, 0, j)
    direct = covariance(sys, g.edge_labels["v0"], g.edge_labels[f"v{j}"])
    print(f"  cov(m_0, m_{j}) = {closed}   (direct: match = {closed == direct})")

print()
print("== on a positive scalar chain the covariances alternate in sign ==")
pos = uniform_grid(5, 1, b=[Matrix([[Fraction(k + 1, 2)]]) for k in range(6)])
for j in range(1, 6):
    cov = grid_covariance(pos, 0, j)
    print(f"  cov(m_0, m_{j}) = {cov}")

print()
print("== q-Fibonacci: left-edge usage under the alternating Q weighting ==")
for q in (Fraction(1), Fraction(2), Fraction(1, 3)):
    g, val = q_fibonacci_grid(4, Matrix([[q]]))
    check = expected_multiplicity(probability_matrix(assemble(g), g.edge_labels["v0"]))
    print(f"  q = {q}: q Ftilde_4 / F_5 = {val}  (graph agrees: {check == val})")
Q = Matrix([[Fraction(2), Fraction(1)], [Fraction(0), Fraction(1, 2)]])
g, val = q_fibonacci_grid(3, Q)
check = expected_multiplicity(probability_matrix(assemble(g), g.edge_labels["v0"]))
print(f"  matrix Q: tr(Q Ftilde_3(Q) F_4(Q)^-1) = {val}  (graph agrees: {check == val})")
