"""Regenerate the parametrised benchmark problems under src/fondplan/benchmarks.

Only the triangle and blocksworld problems are generated; the other domains
are small enough to maintain by hand.
"""

from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "src" / "fondplan" / "benchmarks"


def triangle(n: int) -> str:
    d = 2 * n + 1
    locs = [(i, j) for i in range(1, d + 1) for j in range(1, d - i + 2)]
    name = lambda i, j: f"l-{i}-{j}"  # noqa: E731
    exists = set(locs)
    roads = []
    for i, j in locs:
        for a, b in ((i, j + 1), (i + 1, j)):
            if (a, b) in exists:
                roads.append(((i, j), (a, b)))
        if i > 1 and (i - 1, j + 1) in exists:
            roads.append(((i, j), (i - 1, j + 1)))
    spares = [(i, j) for i, j in locs if i >= 2]
    lines = [f"(define (problem triangle-tire-{n})", "  (:domain triangle-tire)"]
    lines.append("  (:objects " + " ".join(name(*p) for p in locs) + " - location)")
    lines.append("  (:init (vehicle-at l-1-1) (not-flattire)")
    for a, b in roads:
        lines.append(f"         (road {name(*a)} {name(*b)})")
    for p in spares:
        lines.append(f"         (spare-in {name(*p)})")
    lines[-1] += ")"
    lines.append(f"  (:goal (vehicle-at l-1-{d})))")
    return "\n".join(lines) + "\n"


def blocks(name: str, towers: list[list[str]], goal: list[list[str]]) -> str:
    """Towers are listed bottom to top."""
    objs = sorted(b for t in towers for b in t)
    init = ["(handempty)"]
    for t in towers:
        init.append(f"(ontable {t[0]})")
        init += [f"(on {t[k + 1]} {t[k]})" for k in range(len(t) - 1)]
        init.append(f"(clear {t[-1]})")
    g = []
    for t in goal:
        g.append(f"(ontable {t[0]})")
        g += [f"(on {t[k + 1]} {t[k]})" for k in range(len(t) - 1)]
    return (f"(define (problem {name})\n  (:domain blocks-fond)\n"
            f"  (:objects {' '.join(objs)} - block)\n"
            f"  (:init {' '.join(init)})\n"
            f"  (:goal (and {' '.join(g)})))\n")


def main() -> None:
    for n in (1, 2, 3):
        (ROOT / "triangle-tireworld" / f"p0{n}.pddl").write_text(triangle(n))
    (ROOT / "blocksworld" / "p01.pddl").write_text(
        blocks("bw-p01", [["a", "b", "c"], ["d"]], [["c", "b"], ["d", "a"]]))
    (ROOT / "blocksworld" / "p02.pddl").write_text(
        blocks("bw-p02", [["a", "b"], ["c", "d", "e"]], [["e", "d", "c", "b", "a"]]))


if __name__ == "__main__":
    main()
