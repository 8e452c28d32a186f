"""Regenerate tests/snapshots/param_table.json from the current tables.

Only run this after a deliberate change to the default coefficients; the
snapshot exists to catch accidental ones.
"""

import json
from pathlib import Path

from canyon_sim.pathloss import LinkState
from canyon_sim.smallscale import Param, param_table

S_GRID = (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5)
OUT = Path(__file__).resolve().parent.parent / "tests" / "snapshots" / "param_table.json"


def main():
    entries = {}
    for state in LinkState:
        for param in Param:
            entries[f"{state.value}.{param.value}"] = {
                repr(s): [spec.family.value, spec.location, spec.scale]
                for s in S_GRID
                for spec in [param_table(s, state)[param]]
            }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"s_norm_grid": list(S_GRID), "entries": entries},
                              indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
