"""Random small FOND tasks for differential testing against the oracle."""

from __future__ import annotations

import random

from .model import FondTask, binary_task


def random_task(rng: random.Random, max_vars: int = 8, max_actions: int = 6,
                max_outcomes: int = 2, name: str = "rand") -> FondTask:
    """A random task over binary variables.

    Preconditions and effects are sparse random literals; the goal is a
    random nonempty conjunction.  Sizes are drawn uniformly up to the caps.
    """
    n = rng.randint(2, max_vars)
    init = [rng.randint(0, 1) for _ in range(n)]
    goal_vars = rng.sample(range(n), rng.randint(1, min(3, n)))
    goal = {v: rng.randint(0, 1) for v in goal_vars}
    actions = []
    for i in range(rng.randint(1, max_actions)):
        pre_vars = rng.sample(range(n), rng.randint(0, min(2, n)))
        pre = {v: rng.randint(0, 1) for v in pre_vars}
        effs = []
        for _ in range(rng.randint(1, max_outcomes)):
            ev = rng.sample(range(n), rng.randint(1, min(2, n)))
            effs.append({v: rng.randint(0, 1) for v in ev})
        actions.append((f"a{i}", pre, effs))
    return binary_task(n, init, goal, actions, name)
