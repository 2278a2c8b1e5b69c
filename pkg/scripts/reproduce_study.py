"""Run the hub-satellite power/level study at the three tabulated R² levels."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from src.cli.commands import cmd_simulate  # noqa: E402
from src.models import Method, RunConfig  # noqa: E402
from src.simulation.design import DEFAULT_NPE, EXTENDED_NPE, SIGMA_FOR_R2  # noqa: E402
from src.utils.parallel import resolve_threads  # noqa: E402

OUT_DIR = ROOT / "data" / "study"
MASTER_SEED = 20240101


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=20)
    parser.add_argument("--extended", action="store_true", help="use the 14-point NPE preset")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--out", default=str(OUT_DIR))
    args = parser.parse_args()

    config = RunConfig(
        mode="simulate",
        methods=(Method.GRACE, Method.GRACER, Method.GRACEI, Method.RIDGE),
        npe_list=EXTENDED_NPE if args.extended else DEFAULT_NPE,
        r2_list=tuple(sorted(SIGMA_FOR_R2)),
        replicates=args.replicates,
        seed=MASTER_SEED,
        threads=resolve_threads(args.threads),
        out_dir=args.out,
    )
    for path in cmd_simulate(config):
        print(f"Wrote {path}")


if __name__ == "__main__":
    main()
