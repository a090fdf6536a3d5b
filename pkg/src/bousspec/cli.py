"""
Command-line front end.

    bousspec spectrum --coeffs u.json --n 1..5 --format csv
    bousspec norming  --coeffs u.json --n -3..3
    bousspec verify   --coeffs u.json --n 1..12 --ladder 0.02,0.04
    bousspec flow     --coeffs u.json --n 1..3 --points 64
    bousspec unperturbed --n 1..20
    bousspec battery  --coeffs u.json --samples 20 --seed 7

Exit status: 0 success, 1 invalid input or configuration, 2 numerical
failure (localization, winding, selection, propagation) or a failed
verification.  Tolerance defaults can be overridden through ``BOUSSPEC_RTOL``,
``BOUSSPEC_Z_TOL``, ``BOUSSPEC_CEILING`` and ``BOUSSPEC_REGIME_RADIUS``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .charfn import RealnessError, SelectionError
from .coeffs import CoeffPair, load_coeffs, predictors, sobolev_norm, transform_reflect
from .norming import NormingSignError, norming_cosine, norming_sine, norming_sine_any
from .propagator import DEFAULT_RTOL, PropagationError
from .reporting import COLUMNS, build_document, dumps_csv, dumps_json
from .spectrum import (DESIGN_LIMIT, Z_TOL, SpectrumError, eigenvalue, flow_track, solve_record,
                       unperturbed_eigenvalue, unperturbed_slope, unperturbed_z)
from .verify import (CONSTANT_CEILING, REGIME_RADIUS, identity_battery, random_lambda_samples,
                     scaling_ladder, theorem11_suite, theorem12_suite)

COMMANDS = tuple(COLUMNS)
NUMERICAL_ERRORS = (SpectrumError, SelectionError, RealnessError, PropagationError,
                    NormingSignError)
ENV_OVERRIDES = {"rtol": "BOUSSPEC_RTOL", "z_tol": "BOUSSPEC_Z_TOL",
                 "ceiling": "BOUSSPEC_CEILING", "regime_radius": "BOUSSPEC_REGIME_RADIUS"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    coeff_path: str | None = None
    n_range: tuple[int, int] = (1, 5)
    rtol: float = DEFAULT_RTOL
    z_tol: float = Z_TOL
    ceiling: float = CONSTANT_CEILING
    regime_radius: float = REGIME_RADIUS
    winding_samples: int = 64
    check_winding: bool = True
    ladder: list[float] = field(default_factory=list)
    flow_points: int = 64
    lambdas: list[float] = field(default_factory=list)
    samples: int = 20
    seed: int = 0
    output: str | None = None
    format: str = "json"
    jobs: int = 1
    metadata: bool = True

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        lo, hi = self.n_range
        if lo > hi:
            raise ConfigError(f"empty index range {lo}..{hi}")
        if max(abs(lo), abs(hi)) > DESIGN_LIMIT:
            raise ConfigError(f"index range {lo}..{hi} exceeds the design limit {DESIGN_LIMIT}")
        if self.command == "unperturbed" and lo < 1:
            raise ConfigError("unperturbed needs positive indices")
        for name in ("rtol", "z_tol", "ceiling", "regime_radius"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.winding_samples < 64:
            raise ConfigError("winding_samples must be at least 64")
        if self.flow_points < 2:
            raise ConfigError("flow_points must be at least 2")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.command != "unperturbed" and self.coeff_path is None:
            raise ConfigError(f"{self.command} needs --coeffs")
        if any(e <= 0 for e in self.ladder):
            raise ConfigError("ladder entries must be positive")
        if any(lam == 0 for lam in self.lambdas):
            raise ConfigError("lambda = 0 is excluded")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")

    @property
    def indices(self) -> list[int]:
        lo, hi = self.n_range
        return [n for n in range(lo, hi + 1) if n != 0]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["n_range"] = list(self.n_range)
        return d


def parse_range(text: str) -> tuple[int, int]:
    """``"a..b"`` or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..")
            return int(a), int(b)
        k = int(text)
        return k, k
    except ValueError:
        raise ConfigError(f"cannot parse index range {text!r}; expected a..b") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def _env_defaults() -> dict:
    out = {}
    for key, var in ENV_OVERRIDES.items():
        if var in os.environ:
            try:
                out[key] = float(os.environ[var])
            except ValueError:
                raise ConfigError(f"{var}={os.environ[var]!r} is not a number") from None
    return out


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors (exit 1), not argparse's exit 2
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _join_negative_ranges(argv: list[str]) -> list[str]:
    """Let ``--n -3..3`` through; argparse would read ``-3..3`` as a flag."""
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--n":
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and ".." in nxt:
                out.append(f"--n={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bousspec", description=(
        "Three-point spectrum, norming constants and residual checks for the "
        "third-order good Boussinesq Lax operator."))
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--coeffs", dest="coeff_path", help="coefficient JSON file")
        s.add_argument("--n", dest="n_range", help="index range a..b (0 is skipped)")
        s.add_argument("--config", help="JSON file with RunConfig fields")
        s.add_argument("--output", "-o", help="output path (default: stdout)")
        s.add_argument("--format", choices=("csv", "json"))
        s.add_argument("--rtol", type=float)
        s.add_argument("--z-tol", dest="z_tol", type=float)
        s.add_argument("--jobs", type=int)
        s.add_argument("--no-metadata", dest="metadata", action="store_const", const=False,
                       help="omit the timestamp block (byte-identical reruns)")
        if name in ("spectrum", "verify"):
            s.add_argument("--winding-samples", dest="winding_samples", type=int)
            s.add_argument("--no-winding", dest="check_winding", action="store_const",
                           const=False)
        if name == "verify":
            s.add_argument("--ladder", type=_floats, help="comma list of ||u||_1 values")
            s.add_argument("--ceiling", type=float)
            s.add_argument("--regime-radius", dest="regime_radius", type=float)
        if name == "flow":
            s.add_argument("--points", dest="flow_points", type=int)
        if name == "battery":
            s.add_argument("--lambdas", type=_floats, help="comma list of real samples")
            s.add_argument("--samples", type=int)
            s.add_argument("--seed", type=int)
    return p


def resolve_config(argv=None) -> RunConfig:
    """Defaults, then ``--config`` file, then environment, then flags."""
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_ranges(argv))
    values: dict = {"command": args.command}
    known = {f.name for f in dataclasses.fields(RunConfig)}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
        if "n_range" in data:
            values["n_range"] = tuple(data["n_range"])
    values.update(_env_defaults())
    for key, val in vars(args).items():
        if key in known and key != "command" and val is not None:
            values[key] = val
    if isinstance(values.get("n_range"), str):
        values["n_range"] = parse_range(values["n_range"])
    if values.get("format") is None and values.get("output", "") and \
            str(values["output"]).endswith(".csv"):
        values["format"] = "csv"
    cfg = RunConfig(**{k: v for k, v in values.items() if v is not None})
    cfg.validate()
    return cfg


def _diagnostic(exc: Exception, n: int | None, lam: float | None) -> dict:
    return {"module": type(exc).__module__.rsplit(".", 1)[-1], "error": type(exc).__name__,
            "n": n, "lam": lam, "message": str(exc)}


def _disk_center(n: int) -> float:
    return unperturbed_eigenvalue(abs(n)) * (1 if n > 0 else -1)


def _spectrum_row(u: CoeffPair, n: int, cfg: RunConfig) -> dict:
    kw = dict(rtol=cfg.rtol, z_tol=cfg.z_tol, check_winding=cfg.check_winding,
              winding_samples=cfg.winding_samples)
    rec = solve_record(u, n, **kw)
    mu_t = solve_record(transform_reflect(u), n, **dict(kw, check_winding=False)).mu
    return {"n": n, "mu": rec.mu, "mu_tilde": mu_t, "mu_unperturbed": _disk_center(n),
            "z": rec.z, "winding_verified": rec.winding_verified,
            "refinement_residual": rec.refinement_residual}


def _norming_row(u: CoeffPair, n: int, cfg: RunConfig) -> dict:
    kw = dict(rtol=cfg.rtol, z_tol=cfg.z_tol, check_winding=False)
    mu = eigenvalue(u, n, **kw)
    mu_t = eigenvalue(transform_reflect(u), n, **kw)
    row = {"n": n, "mu": mu, "mu_tilde": mu_t, "h_cn": norming_cosine(u, n, mu)}
    if n > 0:
        rec = norming_sine(u, n, mu_t, rtol=cfg.rtol)
        row["h_sn"], row["log_tau3"] = rec.h_sn, rec.tau3.log_abs()
    else:
        row["h_sn"] = norming_sine_any(u, n, rtol=cfg.rtol)
    row["gamma"], row["beta"] = predictors(u, n)
    return row


def _flow_rows(u: CoeffPair, n: int, cfg: RunConfig) -> list[dict]:
    grid = np.linspace(0.0, 1.0, cfg.flow_points)
    traj = flow_track(u, n, grid, rtol=cfg.rtol, z_tol=cfg.z_tol)
    zc = unperturbed_z(n)
    return [{"n": n, "t": t, "mu": mu, "z_offset": float(np.cbrt(mu)) - zc} for t, mu in traj]


_WORKERS = {"spectrum": _spectrum_row, "norming": _norming_row, "flow": _flow_rows}


def _per_index(task: tuple) -> tuple[int, object, dict | None]:
    command, u_dict, n, cfg_dict = task
    cfg = RunConfig(**dict(cfg_dict, n_range=tuple(cfg_dict["n_range"])))
    u = CoeffPair.from_dict(u_dict)
    try:
        return n, _WORKERS[command](u, n, cfg), None
    except NUMERICAL_ERRORS as exc:
        return n, None, _diagnostic(exc, n, _disk_center(n))


def _map_indices(command: str, u: CoeffPair, indices, cfg: RunConfig):
    tasks = [(command, u.to_dict(), n, cfg.to_dict()) for n in indices]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(_per_index, tasks))
    return [_per_index(t) for t in tasks]


def run(cfg: RunConfig) -> tuple[int, dict, list[dict]]:
    """Execute one command; returns ``(exit status, JSON document, CSV rows)``."""
    u = None
    if cfg.coeff_path is not None:
        try:
            u = load_coeffs(cfg.coeff_path)
        except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load coefficients from {cfg.coeff_path}: {exc}") from None
        if cfg.command != "battery":
            try:
                u.require_mean_zero()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    rows: list[dict] = []
    diagnostics: list[dict] = []
    summary: dict = {}
    cmd = cfg.command

    if cmd == "unperturbed":
        for n in cfg.indices:
            rows.append({"n": n, "z": unperturbed_z(n), "mu": unperturbed_eigenvalue(n),
                         "delta0_slope": unperturbed_slope(n)})
        summary["passed"] = True

    elif cmd in _WORKERS:
        summary["norm"] = sobolev_norm(u)
        for n, out, diag in _map_indices(cmd, u, cfg.indices, cfg):
            if diag is not None:
                diagnostics.append(diag)
            elif cmd == "flow":
                rows.extend(out)
            else:
                rows.append(out)
        if cmd == "flow":
            by_n: dict[int, list] = {}
            for r in rows:
                by_n.setdefault(r["n"], []).append(r)
            summary["periodicity"] = {str(n): abs(rs[-1]["mu"] - rs[0]["mu"]) / abs(rs[0]["mu"])
                                      for n, rs in by_n.items()}
            summary["confined"] = all(abs(r["z_offset"]) < 1.0 for r in rows)
        summary["passed"] = not diagnostics and summary.get("confined", True)

    elif cmd == "verify":
        ns = cfg.indices
        n_max = max(abs(n) for n in ns)
        negative = any(n < 0 for n in ns)
        kw = dict(regime_radius=cfg.regime_radius, ceiling=cfg.ceiling, rtol=cfg.rtol)
        try:
            if cfg.ladder:
                eps = sobolev_norm(u)
                if eps == 0:
                    raise ConfigError("an epsilon ladder needs nonzero coefficients")
                family = lambda e: u * (e / eps)
                reports = []
                for kind in ("thm11", "thm12"):
                    extra = {"check_winding": cfg.check_winding} if kind == "thm11" else {}
                    sc = scaling_ladder(family, kind, cfg.ladder, n_max, negative=negative,
                                        **kw, **extra)
                    reports.extend(sc.reports)
                    summary[f"{kind}_ratios"] = {str(k): v for k, v in sc.ratios.items()}
                    summary[f"{kind}_passed"] = sc.passed
            else:
                reports = [theorem11_suite(u, n_max, negative=negative,
                                           check_winding=cfg.check_winding, **kw),
                           theorem12_suite(u, n_max, negative=negative, **kw)]
                for r in reports:
                    summary[f"{r.kind}_passed"] = r.passed
            for r in reports:
                summary.setdefault("bound_constant_fit", {})[f"{r.kind}@{r.epsilon!r}"] = \
                    r.bound_constant_fit
                for row in r.rows:
                    res = row.residual_thm11 if r.kind == "thm11" else row.residual_thm12
                    rows.append({"suite": r.kind, "epsilon": r.epsilon, "n": row.n,
                                 "value": row.value, "gamma": row.gamma, "beta": row.beta,
                                 "residual": res, "bound_constant_fit": row.bound_constant_fit})
            summary["passed"] = summary["thm11_passed"] and summary["thm12_passed"]
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None
        except NUMERICAL_ERRORS as exc:
            diagnostics.append(_diagnostic(exc, None, None))
            summary["passed"] = False

    elif cmd == "battery":
        lams = cfg.lambdas or list(random_lambda_samples(np.random.default_rng(cfg.seed),
                                                         cfg.samples))
        rep = identity_battery(u, lams, rtol=cfg.rtol)
        d = rep.to_dict()
        rows = d["checks"]
        summary = {"passed": d["passed"], "worst": d["worst"]}

    doc = build_document(cmd, cfg.to_dict(), rows, summary, diagnostics, cfg.metadata)
    status = 0 if summary.get("passed") and not diagnostics else 2
    return status, doc, rows


def _emit(cfg: RunConfig, doc: dict, rows: list[dict]) -> None:
    if cfg.format == "json":
        text = dumps_json(doc)
    else:
        text = dumps_csv(cfg.command, rows)
    if cfg.output is None:
        sys.stdout.write(text)
        return
    out = Path(cfg.output)
    out.write_text(text, encoding="utf-8")
    if cfg.format == "csv":
        # summary and diagnostics do not fit the row layout
        out.with_suffix(".report.json").write_text(dumps_json(doc), encoding="utf-8")


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        status, doc, rows = run(cfg)
    except ConfigError as exc:
        print(f"bousspec: invalid input: {exc}", file=sys.stderr)
        return 1
    for d in doc["diagnostics"]:
        where = f"n={d['n']}" if d["n"] is not None else "suite"
        lam = f", lam~{d['lam']:.6g}" if d["lam"] is not None else ""
        print(f"bousspec: {d['module']} {d['error']} at {where}{lam}: {d['message']}",
              file=sys.stderr)
    _emit(cfg, doc, rows)
    return status


if __name__ == "__main__":
    sys.exit(main())
