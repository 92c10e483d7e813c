"""Exact S(D) against its WKB counterpart.

    tunnelpath wkb-compare --config fig2.json --out fig2
    python plot_wkb.py fig2
"""
import json
import sys

import matplotlib.pyplot as plt
import pandas as pd

out = sys.argv[1] if len(sys.argv) > 1 else "fig2"
df = pd.read_csv(f"{out}/wkb_compare.csv")
report = json.load(open(f"{out}/wkb_witness.json"))["summary"]["pairs"]

fig, ax = plt.subplots(figsize=(5, 4))
for (gamma, eps), g in df.groupby(["gamma", "epsilon"]):
    line, = ax.plot(g["D"], g["S_exact"], label=f"exact, $\\gamma$ = {gamma:g}")
    ax.plot(g["D"], g["S_wkb"], "--", color=line.get_color(), label="WKB")
for r in report:
    w = r.get("wkb_witness")
    if w:
        ax.plot([w["D1"], w["D2"]], [w["S"], w["S"]], "k:", lw=0.8)
ax.set_xlabel("D = x / a")
ax.set_ylabel("S")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(f"{out}/wkb.png", dpi=150)
