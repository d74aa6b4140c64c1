"""
Dyad indexing and overlap structure
===================================

A dyadic dataset indexes pairs of units.  This walk-through builds the
smallest interesting network by hand and shows the bookkeeping the rest
of the package relies on: canonical pair keys, the lexicographic dyad
index, and the overlap structure that makes dyadic errors dependent.
"""

import numpy as np

from dyadrobust import (
    DyadDataset,
    DyadKey,
    dyad_index,
    dyad_members,
    shares_member,
    unit_cluster,
)

print("Dyad indexing and overlap structure")
print("=" * 40)

###############################################################################
# Canonical keys and the pair index
# ---------------------------------
# Undirected dyads are stored with the smaller member first.  The index
# enumerates pairs in lexicographic order, matching np.triu_indices.

n_units = 5
key = DyadKey.canonical(3, 1)
print(f"canonical form of (3, 1): {key}")

for i in range(n_units):
    for j in range(i + 1, n_units):
        idx = dyad_index(DyadKey(i, j), n_units)
        print(f"  pair ({i}, {j}) -> index {idx}")

# the mapping is a bijection: members recover the key
idx = dyad_index(DyadKey(1, 4), n_units)
print(f"index {idx} -> members {dyad_members(idx, n_units)}")

###############################################################################
# Overlap: which pairs are dependent?
# -----------------------------------
# Two dyads are dependent when they share a member.  In a complete
# cross-section each dyad overlaps 2 * (n_units - 2) others.

a = DyadKey(0, 1)
overlaps = [
    DyadKey(i, j)
    for i in range(n_units)
    for j in range(i + 1, n_units)
    if (i, j) != (0, 1) and shares_member(a, DyadKey(i, j))
]
print(f"\ndyads overlapping {a}: {len(overlaps)} (expected {2 * (n_units - 2)})")
for other in overlaps:
    print(f"  {other}")

###############################################################################
# A dataset and its unit clusters
# -------------------------------
# DyadDataset validates the dyadic structure and exposes the derived
# dyad codes.  unit_cluster collects every row in which a unit appears;
# each row belongs to exactly two such clusters, one per member.

rng = np.random.default_rng(0)
iu, ju = np.triu_indices(n_units, k=1)
x = np.column_stack([np.ones(iu.shape[0]), rng.standard_normal(iu.shape[0])])
y = x @ np.array([1.0, 0.5]) + rng.standard_normal(iu.shape[0])
ds = DyadDataset(n_units=n_units, unit_i=iu, unit_j=ju, y=y, x=x)

print(f"\nrows={ds.n_rows} dyads={ds.n_dyads} units={ds.n_units}")
print(f"dyad codes (lexicographic): {ds.dyad_code}")

total = 0
for unit in range(n_units):
    rows = unit_cluster(ds, unit)
    total += rows.shape[0]
    print(f"  unit {unit} appears in rows {rows}")
print(f"memberships sum to {total} = 2 * n_rows = {2 * ds.n_rows}")
