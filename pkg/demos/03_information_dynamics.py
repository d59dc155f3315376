"""Averaged information dynamics on all three datasets.

Runs a reduced experiment (10 seeds instead of the default 50) so it
finishes quickly, then prints the trend summary for each dataset. CSVs land
in ./demo_results/<dataset>/; any plotting tool can take it from there.
"""
import sys

from qnnmi.runner import config_from_dict, run_experiment, summarize

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 10

for name in ("iris2", "diabetes", "bcw"):
    cfg = config_from_dict({"dataset": {"name": name}, "runs": runs, "out": f"demo_results/{name}"})
    agg = run_experiment(cfg)
    rep = summarize(agg)
    loss = agg.column("loss")
    print(f"\n{name}: loss {loss[0]:.3f} -> {loss[-1]:.3f}, train acc {agg.column('accuracy')[-1]:.3f}")
    print(f"  I(Di:Mo)  {agg.column('I_Di_Mo')[0]:.4f} -> {rep.final_I_Di_Mo:.4f}  (spearman {rep.spearman_I_Di_Mo:.2f})")
    print(f"  I(Mi:Mo)  peak {rep.peak_I_Mi_Mo:.4f} at epoch {rep.peak_epoch}, final {rep.final_I_Mi_Mo:.4f}, two-phase={rep.two_phase}")
    print(f"  final sum of single-qubit I(Di_q:Mo) {rep.final_per_qubit_sum:.4f} vs joint {rep.final_I_Di_Mo:.4f}")
