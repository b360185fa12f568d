"""Residual certification of the four solution families, optionally with CSV samples.

    python scripts/certify_families.py --out runs/families
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from kdv5.solutions import make
from kdv5.verify import Grid, pde_residual, sample_csv


@dataclass
class CertifyConfig:
    grid: Grid = field(default_factory=Grid)
    threshold: float = 1e-8
    out: Path | None = None
    sample_grid: Grid = field(default_factory=lambda: Grid((0.0, 1.0), (-10.0, 10.0), 11, 201))


FAMILIES = {
    "exponential": {"m": (1, 1, 1, -2, 1), "c2": 1},
    "kink": {"a": 1, "m4": 1, "m5": 1},
    "soliton": {"a": 1, "m4": 2, "m5": 1},
    "compacton": {"a": 1, "m5": 1},
}


def run(cfg: CertifyConfig) -> dict:
    rows = {}
    for family, params in FAMILIES.items():
        start = time.perf_counter()
        m, sol = make(family, **params)
        report = pde_residual(sol, m.instance(cfg.grid.t_range), cfg.grid, cfg.threshold)
        rows[family] = {
            "constants": m.to_json(),
            "solution": str(sol.u),
            "maxAbsResidual": report.max_abs_residual,
            "pass": report.passed,
            "seconds": round(time.perf_counter() - start, 3),
        }
        if cfg.out is not None:
            cfg.out.mkdir(parents=True, exist_ok=True)
            sample_csv(sol, cfg.sample_grid, cfg.out / f"{family}.csv")
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=None, help="directory for CSV samples and summary.json")
    ap.add_argument("--nt", type=int, default=101)
    ap.add_argument("--nx", type=int, default=401)
    args = ap.parse_args()
    cfg = CertifyConfig(grid=Grid(nt=args.nt, nx=args.nx), out=args.out)
    rows = run(cfg)
    for family, row in rows.items():
        print(f"{family:12s} residual {row['maxAbsResidual']:.2e}  {'pass' if row['pass'] else 'FAIL'}  {row['seconds']}s")
    if cfg.out is not None:
        summary = {"config": {"grid": asdict(cfg.grid), "threshold": cfg.threshold}, "families": rows}
        (cfg.out / "summary.json").write_text(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
