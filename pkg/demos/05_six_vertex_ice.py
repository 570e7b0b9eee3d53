"""Square ice as a mixed dimer model with 1x2 edge weights.

Oxygens (black, covered twice) sit on the lattice; hydrogens (white,
covered once) sit on edge midpoints, with pendant hydrogens on the left
and right boundary only.  Decorating each oxygen's four edges with the
row vectors (1,0), (cos t, sin t), (0,1), (-sin t, cos t) realizes the
free-fermionic six-vertex model: the Boltzmann weights are the 2x2 minors
of those vectors, and local probabilities come from K^{-1} blocks.
"""

import math
from fractions import Fraction

from dimerlab import assemble, expected_multiplicity, oracle_partition, probability_matrix
from dimerlab.zoo import boltzmann_weights, free_fermion_check, six_vertex, six_vertex_closed_forms

c, s = Fraction(3, 5), Fraction(4, 5)

print("== Boltzmann weights as minors of the direction vectors ==")
a1, a2, b1, b2, c1, c2 = boltzmann_weights(c, s)
print(f"  a = {a1}, b = {b1}, c = {c1}  at (cos, sin) = ({c}, {s})")
print(f"  free-fermion relation c1 c2 = a1 a2 + b1 b2: {free_fermion_check(a1, a2, b1, b2, c1, c2)}")

print()
print("== 2x2 ice with domain walls: two configurations ==")
g = six_vertex(2, 2, (c, s))
print(f"  oracle Z = {oracle_partition(g)},  |det K| = {assemble(g).partition_function()}")
print(f"  (= a^2 + b^2 = {a1 * a1 + b1 * b1})")

print()
print("== 3x3 domain walls: central-vertex edge probabilities ==")
g = six_vertex(3, 3, (c, s))
sys = assemble(g)
east, north = six_vertex_closed_forms(c, s)
for d in ("east", "north", "west", "south"):
    eid = g.edge_labels[f"center-{d}"]
    p = expected_multiplicity(probability_matrix(sys, eid))
    want = east if d in ("east", "west") else north
    print(f"  center {d}: {p}  (closed form {want}, exact match: {p == want})")

print()
print("== the symmetric point theta = pi/4 (float backend) ==")
cf = sf = math.cos(math.pi / 4)
g = six_vertex(3, 3, (cf, sf))
sys = assemble(g)
for d in ("east", "north", "west", "south"):
    eid = g.edge_labels[f"center-{d}"]
    p = expected_multiplicity(probability_matrix(sys, eid))
    print(f"  center {d}: {p:.15f}")
