"""Regenerate the shipped portfolio instances.

Seeds were picked so the optimum selects a proper, non-empty subset of assets.
"""

import json
from pathlib import Path

from pulseforge.vqa.portfolio import random_portfolio

OUT = Path(__file__).resolve().parents[1] / "src" / "pulseforge" / "data"
SEEDS = {2: 205, 4: 400}

for n, seed in SEEDS.items():
    problem = random_portfolio(n, seed)
    cost, x = problem.brute_force()
    (OUT / f"portfolio{n}.json").write_text(json.dumps(problem.to_dict(), indent=2) + "\n")
    print(f"portfolio{n}.json: optimum {x} cost {cost:.6f}")
