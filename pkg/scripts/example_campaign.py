"""Run all three presets, export them and compare against the baseline model.

Usage: python scripts/example_campaign.py [OUT_DIR] [N_DROPS]
"""

import sys
from pathlib import Path

from canyon_sim.harness import compare_models, export, get_preset, run_campaign, summarize
from canyon_sim.pathloss import PathLossConfig


def main(out="canyon_out/example", n_drops=500):
    out = Path(out)
    plcfg = PathLossConfig(breakpoint_distance=50.0)
    for name in ("HCL", "MCL", "LCL"):
        preset = get_preset(name)
        res = run_campaign(preset, n_drops, plcfg, master_seed=1)
        entries = export(res, out / name)
        print(f"{name}: S = {preset.s_value:g}, {len(entries)} files in {out / name}")
        for state, sub in summarize(res).items():
            q05, q50, q95 = sub["ds_ns"]
            print(f"  {state:<4} n={sub['n']:<5} DS q05/q50/q95 = "
                  f"{q05:8.1f} {q50:8.1f} {q95:8.1f} ns   median ASA = {sub['asa'][1]:.3f}")
        cmp = compare_models(preset, n_drops, plcfg, plcfg.baseline())
        rmse = ", ".join(f"{s} {v['rmse_db']:.2f} dB" for s, v in cmp["states"].items()
                         if v["rmse_db"] is not None)
        print(f"  path-loss RMSE vs environment-free baseline: {rmse}")


if __name__ == "__main__":
    args = sys.argv[1:]
    main(args[0] if args else "canyon_out/example", int(args[1]) if len(args) > 1 else 500)
