# Active basis choice: a motorized half-wave plate picks the basis from an
# independent random bit. A faked state aimed at the other basis splits
# 50/50 over both detectors and stays below the click threshold, so each
# side loses half its clicks, yet the surviving pairs still show the
# programmed correlations.
import sys
from dataclasses import replace

import numpy as np

from fakebell import fsg_program, run
from fakebell.coincidence import matrix_row_labels
from fakebell.config import default_config
from fakebell.detectors import DetectorParams

# 2.9e7 emissions give about 7.25e6 coincidences (needs ~2 GB of memory);
# pass a smaller count on the command line for a quick look.
n = int(float(sys.argv[1])) if len(sys.argv) > 1 else 29_000_000
cfg = default_config("twin_fsg_active", n_pairs=n, seed=5)
cfg = replace(cfg, fsg=replace(cfg.fsg, program=fsg_program(0.699275)))
rep = run(cfg)
c = rep.chsh
print(f"S = {c.S:.4f} +/- {c.dS:.4f} from {rep.tally.n_pairs} coincidences")
print(f"efficiency alice {rep.efficiency[0]:.4f}, bob {rep.efficiency[1]:.4f}")

# Sent faked pair versus detected pair.
# Ideal hardware fills only the diagonal.
m = rep.tally.sent_vs_detected
print("off-pattern coincidences (perfect hardware):", rep.tally.off_pattern_count())

# A simplified generator sometimes fires a wrong detector; 7e-4 per pair
# gives about 0.07% unwanted coincidences.
noisy = replace(cfg, n_pairs=min(n, 4_000_000),
                detectors={p: DetectorParams.default_for("active", imperfection_eps=7e-4) for p in ("alice", "bob")})
nrep = run(noisy)
print(f"off-pattern fraction with imperfections: {nrep.tally.off_pattern_fraction():.4%}")

labels = matrix_row_labels()
worst = np.unravel_index(np.argmax(nrep.tally.sent_vs_detected - np.diag(np.diag(nrep.tally.sent_vs_detected))),
                         (16, 16))
print("largest unwanted cell:", labels[worst[0]], "->", labels[worst[1]],
      nrep.tally.sent_vs_detected[worst], "of", nrep.tally.sent_vs_detected.max())
