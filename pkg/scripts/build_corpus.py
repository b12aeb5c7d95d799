"""Write the shipped corpus: the three fixtures plus seeded random instances.

    python3 scripts/build_corpus.py [outdir]
"""

import sys
from pathlib import Path

from zext.fixtures import path_b, star_a, triangle_c
from zext.generate import _expected, generate
from zext.io import save

PER_KIND = {"leaf-metric-instance": 8, "tree-metric-instance": 8, "matrix-metric-instance": 8,
            "cost-instance": 6, "ml-instance": 8}


def main(out="corpus"):
    out = Path(out)
    out.mkdir(exist_ok=True)
    for inst in (star_a(), path_b(), triangle_c()):
        inst.meta["expected"] = _expected(inst, inst.k)
        save(inst, out / f"{inst.name}.json")
    for kind, count in PER_KIND.items():
        for seed in range(count):
            inst = generate(kind, seed=seed, n=5 + seed % 3, labels=3)
            save(inst, out / f"{kind}-{seed:02d}.json")


if __name__ == "__main__":
    main(*sys.argv[1:])
