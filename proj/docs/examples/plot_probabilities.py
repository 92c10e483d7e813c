"""First-detector, post-selected and Born densities at x_first.

    tunnelpath probabilities --config probabilities.json --out probs
    python plot_probabilities.py probs
"""
import json
import sys

import matplotlib.pyplot as plt
import pandas as pd

out = sys.argv[1] if len(sys.argv) > 1 else "probs"
first = pd.read_csv(f"{out}/first_detector.csv")
summary = json.load(open(f"{out}/probabilities_summary.json"))["summary"]

fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(first["tau"], first["P1"] / first["P1"].max(), label="$P_1(x, \\tau)$")
ax.plot(first["tau"], first["psi2"] / first["psi2"].max(), "--", label="$|\\psi_\\tau(x)|^2$")
try:
    post = pd.read_csv(f"{out}/postselected.csv")
    ax.plot(post["tau"], post["P_ps"] / post["P_ps"].max(), ":", label="$P_{ps}(x, \\tau)$")
except FileNotFoundError:
    pass
ax.axvline(summary["peaks"]["quasiclassical_tau"], color="k", lw=0.6)
ax.set_xlabel("$\\tau$")
ax.set_ylabel("normalized density")
ax.legend()
fig.tight_layout()
fig.savefig(f"{out}/densities.png", dpi=150)

for name, v in summary["scalars"].items():
    print(name, v)
