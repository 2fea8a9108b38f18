"""Experiment orchestration and the command-line interface.

Modes, chosen by which sweep list is given:

* no sweep list: single solve (cdG runs also solve dG for comparison)
* ``--sweep-epsilons``: ||u_cdG - u_dG|| as the layer sharpens
* ``--sweep-sigmas``: dG with super-penalised continuous skeleton vs cdG
* ``--sweep-meshes``: errors against the exact solution under refinement
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .assembly import DGParameters, assemble_system
from .linalg import DEFAULT_TOL, solve
from .mesh import RegionSpec, build_structured_mesh, classify_boundary_flow, classify_regions
from .postprocess import (DiscreteField, SweepRecord, l2_norm_diff, linf_norm_diff, write_csv,
                          write_vtk)
from .problems import CATALOG, ProblemSpec, make_problem
from .space import MethodKind, apply_dirichlet_constraints, build_dof_map

log = logging.getLogger(__name__)

EXAMPLE1_REGION = "[0,0.96875)x[0,0.96875)"
FIGURE1_REGION = "[0,0.707)x[0,0.707)"
EXAMPLE2_REGION = "[-1,-0.0625)x[-1,1];(0.0625,1]x[-1,1]"
DEFAULT_REGIONS = {
    "example1": EXAMPLE1_REGION,
    "example2": EXAMPLE2_REGION,
    "manufactured_linear": "[0,0.5)x[0,0.5)",
}
DECADE_EPSILONS = tuple(10.0 ** -p for p in range(1, 9))


class SolverBreakdown(RuntimeError):
    pass


@dataclass
class RunConfig:
    example: str = "example1"
    method: MethodKind = MethodKind.CDG
    epsilon: float = 1e-6
    nx: int = 32
    ny: int = 32
    degree: int = 1
    sigma_c: Optional[float] = None
    sigma_d: Optional[float] = None
    theta: int = -1
    region: Optional[str] = None
    out_csv: Optional[str] = None
    out_vtk: Optional[str] = None
    sweep_epsilons: list = field(default_factory=list)
    sweep_sigmas: list = field(default_factory=list)
    sweep_meshes: list = field(default_factory=list)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        self.method = MethodKind.parse(self.method)
        if self.example not in CATALOG:
            raise ValueError(f"unknown example {self.example!r}; choose from {sorted(CATALOG)}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.nx < 1 or self.ny < 1 or self.degree < 1:
            raise ValueError("nx, ny and degree must be positive")
        for name in ("sigma_c", "sigma_d"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.theta not in (-1, 0, 1):
            raise ValueError("theta must be -1, 0 or 1")
        if any(not e > 0 for e in self.sweep_epsilons):
            raise ValueError("sweep epsilons must be positive")
        if any(not s > 0 for s in self.sweep_sigmas):
            raise ValueError("sweep sigmas must be positive")
        if any(n < 1 for n in self.sweep_meshes):
            raise ValueError("sweep meshes must be positive")
        RegionSpec.parse(self.region_text)

    @property
    def region_text(self) -> str:
        return self.region if self.region is not None else DEFAULT_REGIONS[self.example]

    def params(self, **overrides) -> DGParameters:
        kw = dict(theta=self.theta)
        if self.sigma_d is not None:
            kw["sigma_d"] = self.sigma_d
        if self.sigma_c is not None:
            kw["sigma_c"] = self.sigma_c
        kw.update(overrides)
        return DGParameters.for_degree(self.degree, **kw)


def prepare_mesh(problem: ProblemSpec, nx: int, ny: int, region: str):
    mesh = build_structured_mesh(problem.bounds, nx, ny)
    mesh = classify_regions(mesh, RegionSpec.parse(region))
    return classify_boundary_flow(mesh, problem.b)


def solve_method(mesh, problem: ProblemSpec, degree: int, method, params: DGParameters,
                 tol: float = DEFAULT_TOL) -> DiscreteField:
    """Assemble and solve one discretisation; raises SolverBreakdown."""
    dofs = build_dof_map(mesh, degree, method)
    dofs = apply_dirichlet_constraints(dofs, mesh, problem.g)
    system = assemble_system(mesh, dofs, problem, params)
    x, report = solve(system.matrix, system.rhs, tol)
    if not report.converged:
        raise SolverBreakdown(f"{dofs.method.value} solve failed: relative residual "
                              f"{report.relative_residual:.3e}")
    return DiscreteField(x, dofs, mesh)


def _errors(u: DiscreteField, problem: ProblemSpec):
    if problem.exact_u is None:
        return math.nan, math.nan
    return l2_norm_diff(u, problem.exact_u), linf_norm_diff(u, problem.exact_u)


def _base_record(config: RunConfig, epsilon: float, params: DGParameters, method) -> SweepRecord:
    return SweepRecord(epsilon=float(epsilon), sigma_c=float(params.sigma_c),
                       sigma_d=float(params.sigma_d), theta=int(params.theta),
                       mesh_size=int(config.nx), dofs_cdg=0, dofs_dg=0,
                       method=MethodKind.parse(method).value)


def _vtk_sibling(path, tag: str) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}_{tag}{p.suffix or '.vtk'}")


def run_single(config: RunConfig):
    """Solve the configured problem; cdG runs also solve dG for comparison.

    Returns ``(fields, record)`` with ``fields`` keyed by method name.
    """
    problem = make_problem(config.example, config.epsilon)
    mesh = prepare_mesh(problem, config.nx, config.ny, config.region_text)
    params = config.params()
    rec = _base_record(config, config.epsilon, params, config.method)
    fields = {}
    main = solve_method(mesh, problem, config.degree, config.method, params, config.tol)
    fields[config.method.value] = main
    rec.dofs_cdg = main.dofs.n_dofs
    rec.l2_err_cdg, rec.linf_err_cdg = _errors(main, problem)
    if config.method is MethodKind.CDG:
        dg = solve_method(mesh, problem, config.degree, MethodKind.DG, params, config.tol)
        fields["dg"] = dg
        rec.dofs_dg = dg.dofs.n_dofs
        rec.l2_err_dg, rec.linf_err_dg = _errors(dg, problem)
        rec.l2_diff = l2_norm_diff(main, dg)
        rec.linf_diff = linf_norm_diff(main, dg)
    if config.out_vtk:
        write_vtk(main, config.out_vtk, f"{config.example} {config.method.value} eps={config.epsilon:g}")
        if "dg" in fields and config.method is not MethodKind.DG:
            write_vtk(fields["dg"], _vtk_sibling(config.out_vtk, "dg"),
                      f"{config.example} dg eps={config.epsilon:g}")
    return fields, rec


def _failed(rec: SweepRecord, exc: Exception) -> SweepRecord:
    log.error("sweep entry failed: %s", exc)
    rec.status = f"failed: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return rec


def run_epsilon_sweep(config: RunConfig) -> list[SweepRecord]:
    """One cdG-vs-dG comparison per epsilon, in list order."""
    epsilons = list(config.sweep_epsilons) or list(DECADE_EPSILONS)
    records = []
    for eps in epsilons:
        sub = dataclasses.replace(config, epsilon=eps, method=MethodKind.CDG, out_vtk=None)
        try:
            _, rec = run_single(sub)
        except Exception as exc:  # keep sweeping, record the failure
            rec = _failed(_base_record(sub, eps, sub.params(), MethodKind.CDG), exc)
        records.append(rec)
    if config.out_csv:
        write_csv(records, config.out_csv)
    return records


def run_superpenalty_sweep(config: RunConfig) -> list[SweepRecord]:
    """cdG reference against dG with penalty sigma_c on the continuous skeleton."""
    problem = make_problem(config.example, config.epsilon)
    mesh = prepare_mesh(problem, config.nx, config.ny, config.region_text)
    base = config.params()
    cdg = solve_method(mesh, problem, config.degree, MethodKind.CDG, base, config.tol)
    cdg_err = _errors(cdg, problem)
    records = []
    for sigma_c in config.sweep_sigmas:
        params = config.params(sigma_c=float(sigma_c), superpenalty_mode=True)
        rec = _base_record(config, config.epsilon, params, MethodKind.CDG)
        rec.dofs_cdg = cdg.dofs.n_dofs
        rec.l2_err_cdg, rec.linf_err_cdg = cdg_err
        try:
            dg = solve_method(mesh, problem, config.degree, MethodKind.DG, params, config.tol)
            rec.dofs_dg = dg.dofs.n_dofs
            rec.l2_err_dg, rec.linf_err_dg = _errors(dg, problem)
            rec.l2_diff = l2_norm_diff(cdg, dg)
            rec.linf_diff = linf_norm_diff(cdg, dg)
        except Exception as exc:
            _failed(rec, exc)
        records.append(rec)
    if config.out_csv:
        write_csv(records, config.out_csv)
    return records


def run_convergence_study(config: RunConfig) -> list[SweepRecord]:
    """Errors of ``config.method`` against the exact solution on n-by-n meshes."""
    records = []
    for n in config.sweep_meshes:
        sub = dataclasses.replace(config, nx=int(n), ny=int(n), out_vtk=None)
        params = sub.params()
        rec = _base_record(sub, sub.epsilon, params, sub.method)
        try:
            problem = make_problem(sub.example, sub.epsilon)
            mesh = prepare_mesh(problem, sub.nx, sub.ny, sub.region_text)
            u = solve_method(mesh, problem, sub.degree, sub.method, params, sub.tol)
            rec.dofs_cdg = u.dofs.n_dofs
            rec.l2_err_cdg, rec.linf_err_cdg = _errors(u, problem)
        except Exception as exc:
            _failed(rec, exc)
        records.append(rec)
    if config.out_csv:
        write_csv(records, config.out_csv)
    return records


def observed_orders(records: list[SweepRecord], attr: str = "l2_err_cdg") -> list[float]:
    """log(e_i / e_{i+1}) / log(n_{i+1} / n_i) for successive refinements."""
    out = []
    for a, b in zip(records, records[1:]):
        ea, eb = getattr(a, attr), getattr(b, attr)
        out.append(math.log(ea / eb) / math.log(b.mesh_size / a.mesh_size))
    return out


# ---------------------------------------------------------------- CLI

_FLOATS = ("epsilon", "sigma_c", "sigma_d", "tol")
_INTS = ("nx", "ny", "degree", "theta")
_LISTS = {"sweep_epsilons": float, "sweep_sigmas": float, "sweep_meshes": int}
_STRINGS = ("example", "method", "region", "out_csv", "out_vtk")
_KEYS = set(_FLOATS) | set(_INTS) | set(_LISTS) | set(_STRINGS)


def _parse_list(text: str, cast):
    return [cast(float(t)) if cast is int else cast(t)
            for t in text.replace(",", " ").split() if t]


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment.  Keys use the flag
    names with either dashes or underscores."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                       delimiters=("=",), interpolation=None)
    text = Path(path).read_text()
    parser.read_string("[run]\n" + text)
    out = {}
    for key, value in parser["run"].items():
        name = key.strip().replace("-", "_")
        if name not in _KEYS:
            raise ValueError(f"unknown config key {key!r} in {path}")
        out[name] = value.strip()
    return out


def _coerce(name: str, value):
    if value is None or not isinstance(value, str):
        return value
    if name in _FLOATS:
        return float(value)
    if name in _INTS:
        return int(value)
    if name in _LISTS:
        return _parse_list(value, _LISTS[name])
    if name in ("region", "out_csv", "out_vtk") and value.lower() in ("", "default"):
        return None
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cdgfem",
                                description="cG / dG / cdG solver for stationary advection-diffusion")
    p.add_argument("--config", help="key=value file; flags override its entries")
    p.add_argument("--example", choices=sorted(CATALOG))
    p.add_argument("--method", choices=[m.value for m in MethodKind])
    p.add_argument("--epsilon")
    p.add_argument("--nx")
    p.add_argument("--ny")
    p.add_argument("--degree")
    p.add_argument("--sigma-c")
    p.add_argument("--sigma-d")
    p.add_argument("--theta")
    p.add_argument("--region", help='continuous region, e.g. "[0,0.5)x[0,0.5)" or "none"')
    p.add_argument("--sweep-epsilons", help="comma or space separated list")
    p.add_argument("--sweep-sigmas")
    p.add_argument("--sweep-meshes")
    p.add_argument("--out-csv")
    p.add_argument("--out-vtk")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for name in _KEYS - {"tol"}:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    kwargs = {name: _coerce(name, v) for name, v in values.items()}
    if "nx" in kwargs and "ny" not in kwargs:
        kwargs["ny"] = kwargs["nx"]
    return RunConfig(**kwargs)


def _print_records(records):
    cols = ("epsilon", "sigma_c", "mesh_size", "dofs_cdg", "dofs_dg", "l2_diff", "linf_diff",
            "l2_err_cdg", "linf_err_cdg", "status")
    print("  ".join(f"{c:>12}" for c in cols))
    for r in records:
        row = []
        for c in cols:
            v = getattr(r, c)
            row.append(f"{v:12.4e}" if isinstance(v, float) else f"{str(v):>12}")
        print("  ".join(row))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except (ValueError, OSError, configparser.Error) as exc:
        print(f"cdgfem: invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        if config.sweep_sigmas:
            records = run_superpenalty_sweep(config)
        elif config.sweep_epsilons:
            records = run_epsilon_sweep(config)
        elif config.sweep_meshes:
            records = run_convergence_study(config)
            if len(records) > 1 and all(r.status == "ok" for r in records):
                orders = observed_orders(records)
                print("observed L2 orders:", " ".join(f"{o:.3f}" for o in orders))
        else:
            _, rec = run_single(config)
            records = [rec]
            if config.out_csv:
                write_csv(records, config.out_csv)
    except SolverBreakdown as exc:
        print(f"cdgfem: {exc}", file=sys.stderr)
        return 1
    _print_records(records)
    return 0 if all(r.status == "ok" for r in records) else 1


if __name__ == "__main__":
    sys.exit(main())
