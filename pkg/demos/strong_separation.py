"""
Strong separation on a knowledge base with a self-loop
======================================================

The ontology says that an A-element has no R-successor in A.  The database
has R(a, a) and A(b), so a cannot be in A while b is.  Whether a concept can
tell a from b depends on the signature it may use.
"""

import shutil
from importlib.resources import files

import numpy as np

from alcisep.concepts import Role, format_concept
from alcisep.fo import emit_tptp, fo_strong_check, interpolation_instance
from alcisep.parser import load_kb
from alcisep.report import strong_report, verify_report
from alcisep.strong import strong_separable
from alcisep.typeengine import table_for

FIXTURES = str(files("alcisep") / "fixtures") + "/"

# Load the KB; its signature block restricts separators to the role R.
lkb = load_kb(FIXTURES + "self_loop.kb")
print("signature:", sorted(lkb.sigma))

# The type engine keeps the realizable types as rows of a bit matrix.
table = table_for(lkb.kb)
for i in range(table.n):
    print(f"t{i}:", table.describe(i))

# Which types may sit at the two ends of an R-edge?
print(np.asarray(table.compat_matrix(Role("R")), dtype=int))

# With only R available the pair is inseparable.  The verdict carries a
# witness assignment of types and type sets to the database constants.
v = strong_separable(lkb)
print("separable:", v.separable)
for c, item in v.witnesses[("a", "b")].to_json(table).items():
    print(f"  {c}: type {item['type']}, {len(item['phi'])} type(s) in its set")

# The witness is re-checked independently from a JSON report.
rep = strong_report(lkb, open(FIXTURES + "self_loop.kb").read(), v)
print("certificate:", verify_report(rep))

# Adding A to the signature makes "not A" a strong separator.
full = load_kb(FIXTURES + "self_loop_full.kb")
v = strong_separable(full, synthesize=True)
print("with A:", v.separable, format_concept(v.separator))

# First-order logic can see the loop itself: R(x, x) holds at a and fails at b.
inst = interpolation_instance(lkb, "a", "b")
print(emit_tptp(inst))
if shutil.which("z3"):
    print("prover:", fo_strong_check(lkb, "a", "b", timeout=20))
