"""Carry the kink to a damped variable-coefficient equation and certify it there.

The equation is built from G, H and c1; the kink constants fix the remaining
ratios. Prints the transformation and the residual, and can write CSV samples.
"""
from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from pathlib import Path

from kdv5.equivalence import build_transformation, recognize, transformation_json, transformed_instance
from kdv5.solutions import make_kink, map_solution
from kdv5.symexpr import parse
from kdv5.verify import Grid, pde_residual, sample_csv


@dataclass
class KinkConfig:
    G: str = "1 + t^2/4"
    H: str = "exp(t/2)"
    c1: float = 2.0
    a: float = 1.0
    m4: float = 1.0
    m5: float = 1.0
    k2: float = 0.0
    domain: tuple[float, float] = (0.0, 1.0)


def run(cfg: KinkConfig):
    m, sol = make_kink(cfg.a, cfg.m4, cfg.m5)
    eq = transformed_instance(parse(cfg.G), parse(cfg.H), cfg.c1, m, cfg.domain)
    T = build_transformation(recognize(eq), m, cfg.k2)
    mapped = map_solution(sol, T)
    report = pde_residual(mapped, eq, Grid(t_range=cfg.domain))
    return eq, T, mapped, report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--G", default=KinkConfig.G)
    ap.add_argument("--H", default=KinkConfig.H)
    ap.add_argument("--c1", type=float, default=KinkConfig.c1)
    ap.add_argument("--k2", type=float, default=0.0)
    ap.add_argument("--csv", type=Path, default=None)
    args = ap.parse_args()
    cfg = KinkConfig(G=args.G, H=args.H, c1=args.c1, k2=args.k2)
    eq, T, mapped, report = run(cfg)
    print(json.dumps({"equation": eq.to_json(), "transformation": transformation_json(T)}, indent=2))
    print(f"u = {mapped.u}")
    print(f"max |residual| = {report.max_abs_residual:.2e} ({'pass' if report.passed else 'FAIL'})")
    if args.csv:
        sample_csv(mapped, Grid(cfg.domain, (-10.0, 10.0), 11, 201), args.csv)


if __name__ == "__main__":
    main()
