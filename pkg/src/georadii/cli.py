"""Command-line front end for the radius engine.

Subcommands: ``radii`` (single-point report or radial sweep), ``verify``
(named verification suites), ``cutlocus`` (per-direction cut table), and
``trace`` (one sampled trajectory with its Jacobi field).  Structured
reports are JSON, sweeps and tables are CSV; every output embeds the tool
version and the fully resolved run configuration, and fixed seeds produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__, theorems
from .cutlocus import cut_locus_samples
from .odes import shoot_geodesic
from .profiles import ConfigError, Point, Profile, load_profile_config
from .radii import (
    conjugate_radius,
    extended_focal_radius,
    focal_radius,
    radius_report,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_SUITE_CHOICES = tuple(theorems.SUITE_NAMES)


@dataclasses.dataclass
class RunConfig:
    """Resolved invocation: command, profile source, and numeric knobs."""

    command: str
    config_path: str | None = None
    out: str | None = None
    n_dirs: int = 256
    horizon: float = 20.0
    seed: int = 20260819
    tol: float = 1e-3
    point: tuple[float, float] | None = None
    sweep: tuple[float, float, int] | None = None
    psi: float | None = None
    t_max: float | None = None
    sample_ds: float = 0.02
    n_points: int = 50
    suite: str | None = None
    with_inj: bool = False

    def validate(self) -> None:
        if self.n_dirs <= 0:
            raise ConfigError("--dirs must be a positive integer")
        if self.horizon <= 0.0:
            raise ConfigError("--horizon must be positive")
        if self.tol <= 0.0:
            raise ConfigError("--tol must be positive")
        if self.seed < 0:
            raise ConfigError("--seed must be non-negative")
        if self.n_points <= 0:
            raise ConfigError("--points must be a positive integer")
        if self.sample_ds <= 0.0:
            raise ConfigError("--ds must be positive")
        if self.t_max is not None and self.t_max <= 0.0:
            raise ConfigError("--tmax must be positive")
        if self.point is not None and self.point[0] < 0.0:
            raise ConfigError("--point radius must be non-negative")
        if self.sweep is not None:
            r0, r1, n = self.sweep
            if r0 < 0.0:
                raise ConfigError("--sweep start must be non-negative")
            if r1 <= r0:
                raise ConfigError("--sweep end must exceed its start")
            if n < 2:
                raise ConfigError("--sweep needs at least two samples")

    def resolved(self, profile: Profile | None = None) -> dict:
        body = dataclasses.asdict(self)
        if profile is not None:
            body["profile"] = profile.config
        return body


def _parse_point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError("expected R or R,THETA")
    try:
        r = float(parts[0])
        theta = float(parts[1]) if len(parts) == 2 else 0.0
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad point {text!r}") from exc
    return (r, theta)


def _parse_sweep(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected R0:R1:N")
    try:
        return (float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sweep {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="georadii",
        description="Radius functions of rotationally symmetric surfaces.")
    parser.add_argument("--version", action="version",
                        version=f"georadii {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool) -> None:
        p.add_argument("--config", required=config_required, default=None,
                       help="JSON metric config {kind, params, r_max}")
        p.add_argument("--out", default=None, help="output file path")
        p.add_argument("--dirs", type=int, default=256,
                       help="directions per fan (default 256)")
        p.add_argument("--horizon", type=float, default=20.0,
                       help="integration horizon (default 20)")
        p.add_argument("--seed", type=int, default=20260819,
                       help="RNG seed for sampled suites")
        p.add_argument("--tol", type=float, default=1e-3,
                       help="inequality slack tolerance (default 1e-3)")

    p = sub.add_parser("radii", help="radius report at a point, or a sweep")
    common(p, True)
    p.add_argument("--point", type=_parse_point, default=None,
                   help="base point R or R,THETA")
    p.add_argument("--sweep", type=_parse_sweep, default=None,
                   help="radial sweep R0:R1:N (CSV output)")
    p.add_argument("--with-inj", action="store_true",
                   help="add injectivity / loop columns to the sweep")

    p = sub.add_parser("verify", help="run a verification suite")
    common(p, False)
    p.add_argument("suite", choices=_SUITE_CHOICES,
                   help="suite name, or 'all'")
    p.add_argument("--points", type=int, default=50, dest="n_points",
                   help="sampled points/pairs per profile (default 50)")

    p = sub.add_parser("cutlocus", help="per-direction cut table (CSV)")
    common(p, True)
    p.add_argument("--point", type=_parse_point, required=True,
                   help="source point R or R,THETA")

    p = sub.add_parser("trace", help="one trajectory with Jacobi columns")
    common(p, True)
    p.add_argument("--point", type=_parse_point, required=True,
                   help="start point R or R,THETA")
    p.add_argument("--psi", type=float, required=True,
                   help="launch angle against the outward radial direction")
    p.add_argument("--tmax", type=float, default=None, dest="t_max",
                   help="trajectory length (default: the horizon)")
    p.add_argument("--ds", type=float, default=0.02, dest="sample_ds",
                   help="arclength sample spacing (default 0.02)")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    body = {"config_path": args.config}
    for key, value in vars(args).items():
        if key in fields and key != "config_path":
            body[key] = value
    body["n_dirs"] = args.dirs
    return RunConfig(**body)


def _require_profile(rc: RunConfig) -> Profile:
    if rc.config_path is None:
        raise ConfigError("--config is required for this command")
    return load_profile_config(rc.config_path)


def _dump_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)
    if out is None:
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")


def _csv_writer(fh, rc: RunConfig, profile: Profile | None):
    fh.write(f"# georadii {__version__}\n")
    fh.write("# config " + json.dumps(rc.resolved(profile), sort_keys=True)
             + "\n")
    return csv.writer(fh, lineterminator="\n")


def _num(value) -> str:
    v = float(value)
    return repr(v) if math.isfinite(v) else "inf"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_radii(rc: RunConfig) -> int:
    profile = _require_profile(rc)
    if rc.sweep is None:
        point = rc.point or (1.0, 0.0)
        report = radius_report(
            profile, Point(point[0], point[1]), n_dirs=rc.n_dirs,
            horizon=rc.horizon, with_cut=True, with_totally_conjugate=True)
        payload = {
            "tool": {"name": "georadii", "version": __version__},
            "config": rc.resolved(profile),
            "report": report.to_json_dict(),
        }
        _dump_json(payload, rc.out)
        return EXIT_OK

    r0, r1, n = rc.sweep
    r1 = min(r1, profile.r_max)
    cache = theorems.QuantityCache(profile, profile.name,
                                   horizon=rc.horizon, n_dirs=rc.n_dirs)
    header = ["r", "conjugate", "focal", "extended_focal"]
    if rc.with_inj:
        header += ["injectivity", "loop_length"]
    rows = []
    for i in range(n):
        r = r0 + (r1 - r0) * i / (n - 1)
        scan = cache.scan(r)
        base = Point(cache._key(r), 0.0)
        row = [
            r,
            conjugate_radius(profile, base, scan=scan,
                             horizon=rc.horizon).value,
            focal_radius(profile, base, scan=scan, horizon=rc.horizon).value,
            extended_focal_radius(profile, base, scan=scan,
                                  horizon=rc.horizon).value,
        ]
        if rc.with_inj:
            inj, _conj = cache.quick_injectivity(r)
            row += [inj, cache.loop(r).value]
        rows.append(row)
    out = rc.out or "sweep.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = _csv_writer(fh, rc, profile)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_num(v) for v in row])
    return EXIT_OK


def _verify_summary(records) -> str:
    lines = []
    groups: dict = {}
    for rec in records:
        g = groups.setdefault((rec.claim, rec.profile),
                              {"n": 0, "fail": 0, "vacuous": 0,
                               "worst": math.inf})
        g["n"] += 1
        if not rec.passed:
            g["fail"] += 1
        if rec.vacuous:
            g["vacuous"] += 1
        elif math.isfinite(rec.slack):
            g["worst"] = min(g["worst"], rec.slack)
    for (claim, prof) in sorted(groups):
        g = groups[(claim, prof)]
        worst = "n/a" if not math.isfinite(g["worst"]) else f"{g['worst']:+.3e}"
        status = "FAIL" if g["fail"] else "pass"
        lines.append(f"{status} {claim:24s} {prof:12s} n={g['n']:<4d} "
                     f"fail={g['fail']:<3d} vacuous={g['vacuous']:<3d} "
                     f"worst_slack={worst}")
    return "\n".join(lines)


def cmd_verify(rc: RunConfig) -> int:
    if rc.suite == "all":
        names = [n for n in theorems.SUITE_NAMES if n != "all"]
    else:
        names = [rc.suite]
    if rc.config_path is not None:
        profile = load_profile_config(rc.config_path)
        profiles = {profile.name: profile}
    else:
        profiles = theorems.standard_profiles()
    sconf = theorems.SuiteConfig(
        n_points=rc.n_points, seed=rc.seed, horizon=rc.horizon,
        n_dirs=rc.n_dirs, tolerance=rc.tol)
    caches = theorems.make_caches(profiles, sconf)
    workers = int(os.environ.get("GEORADII_WORKERS", "1") or "1")
    if workers > 1 and len(names) > 1:
        # Suites share the quantity caches; concurrent cache misses at
        # worst duplicate a pure computation.  Records keep suite order,
        # so the output is identical to a serial run.
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {name: pool.submit(theorems.run_suite, name,
                                         caches=caches, config=sconf)
                       for name in names}
            by_name = {name: futures[name].result() for name in names}
    else:
        by_name = {name: theorems.run_suite(name, caches=caches,
                                            config=sconf)
                   for name in names}
    records = [rec for name in names for rec in by_name[name]]
    bad = theorems.nonvacuous_failures(records)
    print(_verify_summary(records))
    print(f"{len(records)} records, {len(bad)} non-vacuous failures")
    if rc.out is not None:
        payload = {
            "tool": {"name": "georadii", "version": __version__},
            "config": {**rc.resolved(), "suites": names,
                       "profiles": {k: p.config for k, p in profiles.items()}},
            "records": theorems.records_to_json(records),
        }
        _dump_json(payload, rc.out)
    return EXIT_OK if not bad else EXIT_VERIFY


def cmd_cutlocus(rc: RunConfig) -> int:
    profile = _require_profile(rc)
    r, theta = rc.point
    samples = cut_locus_samples(profile, Point(r, theta), n_dirs=rc.n_dirs,
                                horizon=rc.horizon, include_beyond=True)
    out = rc.out or "cutlocus.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = _csv_writer(fh, rc, profile)
        writer.writerow(["psi", "t_cut", "kind", "r", "theta", "j_at_cut"])
        for s in samples:
            writer.writerow([_num(s.psi), _num(s.t_cut), s.kind,
                             _num(s.r), _num(s.theta), _num(s.j_at_cut)])
    return EXIT_OK


def cmd_trace(rc: RunConfig) -> int:
    profile = _require_profile(rc)
    r, theta = rc.point
    t_max = rc.t_max if rc.t_max is not None else rc.horizon
    path = shoot_geodesic(profile, r, theta, rc.psi, t_max,
                          sample_ds=rc.sample_ds)
    out = rc.out or "trace.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# georadii {__version__}\n")
        fh.write("# config " + json.dumps(rc.resolved(profile),
                                          sort_keys=True) + "\n")
        fh.write(f"# exit_reason {path.exit_reason}\n")
        for name, value in (("conjugate_time", path.conjugate_time),
                            ("focal_time", path.focal_time),
                            ("extended_focal_time",
                             path.extended_focal_time)):
            if value is not None:
                fh.write(f"# {name} {_num(value)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "r", "theta", "r_dot", "theta_dot",
                         "J", "J_prime"])
        for row in path.samples:
            writer.writerow([_num(v) for v in row[:7]])
    return EXIT_OK


_DISPATCH = {
    "radii": cmd_radii,
    "verify": cmd_verify,
    "cutlocus": cmd_cutlocus,
    "trace": cmd_trace,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        rc = _run_config(args)
        rc.validate()
        return _DISPATCH[rc.command](rc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
