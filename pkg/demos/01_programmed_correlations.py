# The twin faked-state generator needs no entanglement: it draws the
# polarization pair sent to Alice and Bob from a fixed 4x4 table whose
# entries are x = (1+q)/16 or y = (1-q)/16. Counting the first polarization
# of each basis as outcome 1, the table alone fixes the CHSH value at 4q.
import math

import numpy as np

from fakebell import expected_S, fsg_program
from fakebell.sources import POLARIZATION_NAMES

q = 1 / math.sqrt(2)
prog = fsg_program(q)
print("rows: Alice H V + -, columns: Bob H~ V~ +~ -~ (times 16)")
print(np.round(prog.matrix * 16, 4))

# Rows and columns each sum to 1/4: neither side's marginal says anything.
print("row sums", prog.matrix.sum(axis=1), "column sums", prog.matrix.sum(axis=0))

for q in (-1, -0.5, 0, 1 / math.sqrt(2), 1):
    print(f"q = {q:+.4f}  ->  S = {expected_S(fsg_program(q)):+.4f}")

# q = 1 is a PR box: H is never paired with -~.
pr = fsg_program(1.0)
print("PR box, P(H, -~) =", pr.matrix[POLARIZATION_NAMES.index("H"), 3])
