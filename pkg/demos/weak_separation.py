"""
Weak separation, helper symbols and forest-model witnesses
==========================================================

In the database, a lies on an R-cycle of length two, while b only has
reflexive neighbours.  Every point has R-successors and R-predecessors, so
a and b are bisimilar and plain concepts struggle to tell them apart.
"""

from importlib.resources import files

from alcisep.bisim import bisimilar, sigma_hom_exists
from alcisep.concepts import format_concept
from alcisep.kb import connected_component
from alcisep.parser import load_kb
from alcisep.structures import FiniteStructure
from alcisep.weak import WeakBudget, enumerate_separators, weak_separable, witness_model_search

FIXTURES = str(files("alcisep") / "fixtures") + "/"

lkb = load_kb(FIXTURES + "cycle_n2.kb")
db = FiniteStructure.from_database(lkb.kb.database)
print("a ~ b:", bisimilar(db, "a", db, "b", {"R"}))

# The two-cycle does not map homomorphically onto b's neighbourhood.
cycle = connected_component(lkb.kb.database, "a")
print("hom a -> b:", sigma_hom_exists(cycle, "a", db, "b", {"R"}))
print("hom a -> b1:", sigma_hom_exists(cycle, "a", db, "b1", {"R"}))

# One fresh concept name is enough: mark a, and say the mark comes back
# after two R-steps.
v = enumerate_separators(lkb, 8, helpers=1, projective=True)
print(v.status.value, format_concept(v.separator))

# A finite forest model where the cycle cannot be mapped to b certifies the
# same answer without naming a concept.
w = witness_model_search(lkb, depth=1, outdegree=1)
model = w.certificates["b"].structure
print("witness model with", len(model.domain), "elements")

# Without helpers the search goes further, and the separators it finds are
# much larger.
v = weak_separable(lkb, WeakBudget(max_size=8, helpers=0))
print(v.status.value, v.separator and format_concept(v.separator))

# When every point is forced to have successors and predecessors, the short
# separators disappear and the verdict stays open.
serial = load_kb(FIXTURES + "cycle_n2_serial.kb")
print(weak_separable(serial, WeakBudget(max_size=6, helpers=0)).status.value)
print(weak_separable(serial, WeakBudget(max_size=6), projective=True).status.value)
