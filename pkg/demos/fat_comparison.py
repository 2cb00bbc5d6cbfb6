"""
Activation threshold: incremental versus monolithic
===================================================

Under a constructor-time migration every function waits for all of the
state. Migrating per variable, a function only waits for what it touches.
"""

from statemigrate.fixtures import STANDARDS, bundled_source
from statemigrate.metrics import build_report, emit_report, plot_data
from statemigrate.pipeline import analyze

reports = [build_report(std, analyze(bundled_source(std), f"{std}.sol").matrix) for std in STANDARDS]
print(emit_report(reports))

# the same numbers as CSV, ready for any plotting tool
print(plot_data(reports))

# draw the bar chart if matplotlib happens to be around
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    x = range(len(reports))
    plt.bar([i - 0.2 for i in x], [r.fat_incremental for r in reports], 0.4, label="incremental")
    plt.bar([i + 0.2 for i in x], [r.fat_monolithic for r in reports], 0.4, label="monolithic")
    plt.xticks(list(x), [r.standard for r in reports])
    plt.ylabel("data elements waited on (mean)")
    plt.legend()
    plt.savefig("fat_comparison.png", dpi=120)
    print("wrote fat_comparison.png")
