"""Command line entry point ``verlinde-lab``.

Subcommands::

    index   --g G --i I --j J [--torder T]
    verify  SUITE [--g 2,3,4] [--torder T] [--grid default|t:s;t:s] [--seed N]
    table   --g G [--torder T] [--format json|csv] [--out DIR]

Exit codes: 0 success, 1 an identity failed, 2 invalid parameters,
3 computation error, 4 I/O error.  Reports are JSON lines with sorted keys;
exact coefficients are always written as ``"n/d"`` strings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

from . import bethe as bt
from . import symmetry as sy
from .residue import IndexSeries, UnsupportedComponent, index_pair
from .series import SeriesError
from .symmetry import IdentityReport

EXIT_OK, EXIT_FAIL, EXIT_PARAMS, EXIT_COMPUTE, EXIT_IO = 0, 1, 2, 3, 4

SUITES = ("symmetry", "integrality", "functional", "inversion", "vanishing", "reflection", "duality", "mainc", "oracle", "zagier", "bethe")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    genus: list[int] = field(default_factory=lambda: [2, 3, 4])
    torder: int = 12
    sorder: int | None = None
    grid: list[list[float]] = field(default_factory=lambda: [list(p) for p in bt.DEFAULT_GRID])
    bethe_torder: int = 30
    residual_tol: float = bt.RESIDUAL_TOL
    dedup_tol: float = bt.DEDUP_TOL
    compare_tol: float = 1e-6
    seed: int = sy.DEFAULT_SEED
    trials: int = 20
    out: str | None = None
    formats: list[str] = field(default_factory=lambda: ["json"])
    jobs: int = 1

    def validate(self) -> "RunConfig":
        if not self.genus or any(not isinstance(g, int) or g < 2 for g in self.genus):
            raise ConfigError(f"genus entries must be integers >= 2, got {self.genus}")
        for name in ("torder", "bethe_torder", "trials", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.sorder is not None and self.sorder < 1:
            raise ConfigError("sorder must be >= 1")
        for name in ("residual_tol", "dedup_tol", "compare_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for p in self.grid:
            if len(p) != 2 or not abs(p[0]) < 1:
                raise ConfigError(f"grid points are (t, s) with |t| < 1, got {p}")
        if any(f not in ("json", "csv") for f in self.formats):
            raise ConfigError(f"formats must be json or csv, got {self.formats}")
        return self

    def update_from_json_file(self, path: str) -> "RunConfig":
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(self)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            setattr(self, k, v)
        return self


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}") from exc


def parse_grid(text: str) -> list[list[float]]:
    """``default`` or ``t:s;t:s;...``."""
    if text == "default":
        return [list(p) for p in bt.DEFAULT_GRID]
    try:
        pts = [[float(a) for a in item.split(":")] for item in text.split(";") if item.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc
    if not pts or any(len(p) != 2 for p in pts):
        raise ConfigError(f"bad grid {text!r}")
    return pts


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verlinde-lab", description="Equivariant index computations and identity checks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON RunConfig file; flags override it")
    common.add_argument("--torder", type=int, help="truncation order in t")
    common.add_argument("--sorder", type=int, help="truncation order in s")
    common.add_argument("--seed", type=int, help="RNG seed (fallback: $VERLINDE_LAB_SEED)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--jobs", type=int, help="worker processes")
    sub = p.add_subparsers(dest="command", required=True)

    ix = sub.add_parser("index", parents=[common], help="print one index series")
    ix.add_argument("--g", type=int, required=True)
    ix.add_argument("--i", type=int, required=True)
    ix.add_argument("--j", type=int, required=True)

    vf = sub.add_parser("verify", parents=[common], help="run a verification suite")
    vf.add_argument("suite", choices=SUITES)
    vf.add_argument("--g", type=_ints, help="genus list, e.g. 2,3,4")
    vf.add_argument("--grid", help="'default' or 't:s;t:s;...'")

    tb = sub.add_parser("table", parents=[common], help="write the (i, j) index matrix")
    tb.add_argument("--g", type=int, required=True)
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then ``$VERLINDE_LAB_SEED``, then the config file, then flags."""
    cfg = RunConfig()
    env_seed = os.environ.get("VERLINDE_LAB_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"VERLINDE_LAB_SEED must be an integer, got {env_seed!r}") from exc
    if getattr(args, "config", None):
        cfg.update_from_json_file(args.config)
    for name in ("torder", "sorder", "seed", "out", "jobs"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "format", None):
        cfg.formats = [args.format]
    g = getattr(args, "g", None)
    if g is not None:
        cfg.genus = g if isinstance(g, list) else [g]
    grid = getattr(args, "grid", None)
    if grid:
        cfg.grid = parse_grid(grid)
    return cfg.validate()


# ---------------------------------------------------------------------------
# suites: each returns a list of zero-argument tasks producing reports


def _suite_tasks(suite: str, cfg: RunConfig) -> list[tuple[Callable, tuple]]:
    gs, T = cfg.genus, cfg.torder
    if suite == "symmetry":
        return [(sy.verify_symmetry_table, (g, T)) for g in gs]
    if suite == "integrality":
        return [(sy.verify_integrality, (g, T)) for g in gs]
    if suite == "functional":
        return [(sy.verify_functional_equation, (cfg.trials, cfg.seed))]
    if suite == "inversion":
        return [(sy.verify_inversion, ())]
    if suite == "vanishing":
        return [(sy.verify_vanishing, (g, T)) for g in gs]
    if suite == "reflection":
        return [(sy.verify_reflection, (g, T)) for g in gs]
    if suite == "duality":
        tasks = [(sy.verify_duality, (g, i, j, T)) for g in gs for i in range(g - 1) for j in range(g - 1)]
        tasks += [(sy.verify_lidual, (g, i)) for g in gs for i in range(g - 1)]
        tasks += [(verify_real_ratio, (g, kp)) for g in gs for kp in (1, 2, 3)]
        return tasks
    if suite == "mainc":
        return [(bt.verify_mainc, (g, j, T)) for g in gs for j in range(g - 1)]
    if suite == "oracle":
        return [(sy.verify_oracle, (g, T)) for g in gs]
    if suite == "zagier":
        return [(sy.verify_zagier, (200, cfg.seed))]
    if suite == "bethe":
        grid = tuple(tuple(p) for p in cfg.grid)
        tasks = [(verify_closed_form, (g,)) for g in gs]
        tasks += [(verify_stack_grid, (g, grid, cfg.bethe_torder, cfg.compare_tol)) for g in gs]
        return tasks
    raise ConfigError(f"unknown suite {suite!r}")


def verify_real_ratio(g: int, kprime: int, t: str = "1/10") -> IdentityReport:
    """``chi(U(1,1)) / chi(SL(2,R)) = k'^g``, exactly at rational ``t`` and numerically."""
    exact = bt.verlinde_real_exact("U11", g, t, kprime, two_variable=True) / bt.verlinde_real_exact("SL2R", g, t)
    tf = float(bt.rat(t))
    num = bt.u11_two_variable(bt.BetheQuery("U11", g, 2, tf, 0, kprime)) / bt.verlinde_real(bt.BetheQuery("SL2R", g, 2, tf))
    ok = exact == kprime ** g and abs(num - kprime ** g) <= 1e-12 * kprime ** g
    witness = None if ok else {"exact": exact, "numeric": str(num)}
    return IdentityReport("u11_ratio", ok, witness, {"g": g, "kprime": kprime, "t": t}, "", 2)


def verify_closed_form(g: int, ts: Sequence[float] = (0.05, 0.1, 0.2)) -> IdentityReport:
    """``s = 0`` roots are ``+-1, +-i`` and the full sum matches the closed form."""
    if not bt.quartic_factorization_holds():
        return IdentityReport("bethe_closed_form", False, {"check": "quartic"}, {"g": g}, "", 1)
    expect_roots = [1, -1, 1j, -1j]
    for t in ts:
        sol = bt.solve_bethe(bt.BetheQuery("SU11", g, 2, t, 0))
        roots_ok = len(sol.roots) == 4 and all(min(abs(z - r) for z in sol.values) <= 1e-10 for r in expect_roots)
        total = bt.stack_index_su11(bt.BetheQuery("SU11", g, 2, t, 0))
        cf = bt.closed_form_full(g, t)
        rel = abs(total - cf) / abs(cf)
        if not roots_ok or sol.max_residual > 1e-10 or rel > 1e-10:
            return IdentityReport("bethe_closed_form", False, {"t": t, "roots": [str(z) for z in sol.values], "rel_err": rel}, {"g": g}, "", 1)
    return IdentityReport("bethe_closed_form", True, None, {"g": g, "t": list(ts)}, "", len(ts))


def verify_stack_grid(g: int, grid, order_t: int = 30, tol: float = 1e-6) -> IdentityReport:
    rows = bt.compare_stack(g, grid, order_t, tol)
    bad = [r for r in rows if r.verdict != "pass"]
    witness = bad[0].to_json_obj() if bad else None
    return IdentityReport("stack_reconciliation", not bad, witness, {"g": g, "order_t": order_t, "tol": tol}, "", len(rows), {"points": [r.to_json_obj() for r in rows]})


def _run(task):
    fn, args = task
    return fn(*args)


def run_suite(suite: str, cfg: RunConfig) -> list[IdentityReport]:
    tasks = _suite_tasks(suite, cfg)
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_run, tasks))
    return [_run(t) for t in tasks]


# ---------------------------------------------------------------------------
# tables


def table_matrix(g: int, order_t: int) -> dict[tuple[int, int], IndexSeries]:
    return sy.symmetry_matrix(g, order_t)


def table_json(g: int, order_t: int, mat) -> str:
    obj = {"g": g, "order": order_t, "entries": [mat[k].to_json_obj() for k in sorted(mat)]}
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def load_table_json(text: str) -> dict[tuple[int, int], IndexSeries]:
    obj = json.loads(text)
    return {(e["i"], e["j"]): IndexSeries.from_json_obj(e) for e in obj["entries"]}


def table_filename(g: int, order_t: int, fmt: str) -> str:
    return f"table_g{g}_o{order_t}.{fmt}"


def cmd_table(cfg: RunConfig, g: int) -> int:
    mat = table_matrix(g, cfg.torder)
    fmt = cfg.formats[0]
    text = table_json(g, cfg.torder, mat) if fmt == "json" else sy.symmetry_csv(mat, cfg.torder)
    path = Path(cfg.out or ".") / table_filename(g, cfg.torder, fmt)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(str(path))
    return EXIT_OK


def cmd_index(cfg: RunConfig, g: int, i: int, j: int, as_json: bool = False) -> int:
    ser = index_pair(g, i, j, cfg.torder)
    if as_json:
        print(ser.to_json())
    else:
        print("0" if ser.is_zero() else str(ser))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    reports = run_suite(suite, cfg)
    lines = [json.dumps(r.to_json_obj(), sort_keys=True) for r in reports]
    for line in lines:
        print(line)
    if cfg.out:
        try:
            path = Path(cfg.out) / f"verify_{suite}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("\n".join(lines) + "\n")
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARAMS
    try:
        cfg = make_config(args)
        if args.command == "index":
            return cmd_index(cfg, args.g, args.i, args.j, as_json=args.format == "json")
        if args.command == "table":
            return cmd_table(cfg, args.g)
        return cmd_verify(cfg, args.suite)
    except (ConfigError, UnsupportedComponent, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SeriesError, bt.DegenerateParameters, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
