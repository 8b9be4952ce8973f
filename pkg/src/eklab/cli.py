"""Command-line experiments: ``eklab COMMAND [options]``.

Commands: sieve, pmf, check, moments, cdf, limits, control. Each run writes
its CSV/JSON outputs plus ``manifest.json`` into ``--out``. Exit status is
0 on success, 2 when an asserted constraint check fails (or the control
trend is not converging), 1 on any error.

Family specs use the grammar in :mod:`eklab.grammar`, e.g. ``harmonic``,
``zipf(s=1.01)``, ``convex[0.3:harmonic; 0.7:uniform]``, ``reflect[SPEC]``,
``zeroed[2,3]``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .cache import dump_omega_table, file_digest, load_omega_table
from .constraints import check_c4, check_c5, check_c6
from .errors import EKError, IntegrityError, UsageError
from .families import make_pmf
from .grammar import format_family, parse_family
from .limits import log_dependence, lz_limit_study, nonexample_control, zeta_sequence_study
from .moments import mass_by_value, mean_ratio, moment_gap_study, standardized_cdf, write_gnuplot
from .primes import build_omega_table, sieve_primes
from .summation import csum

SCHEMA = "ek-lab/1"
CACHE_ENV = "EKLAB_CACHE_DIR"
COMMANDS = ("sieve", "pmf", "check", "moments", "cdf", "limits", "control")
EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


def _parse_int(text: str) -> int:
    try:
        value = float(text) if any(c in text for c in ".eE") else int(text)
    except ValueError:
        raise UsageError(f"not an integer: {text!r}") from None
    if value != int(value):
        raise UsageError(f"not an integer: {text!r}")
    return int(value)


def _parse_list(text: str, item=float) -> list:
    return [item(tok.strip()) for tok in text.split(",") if tok.strip()]


def _parse_path(text: str) -> list:
    out = []
    for tok in text.split(","):
        s, sep, a = tok.strip().partition(":")
        if not sep:
            raise UsageError(f"path points are s:alpha, got {tok!r}")
        out.append((float(s), float(a)))
    return out


def _fmt_float(x) -> str:
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    command: str
    family: Optional[str] = None
    n: Optional[int] = None
    cutoff: Optional[int] = None
    schedule: Optional[list] = None
    p: Optional[int] = None
    q: Optional[int] = None
    C: Optional[float] = None
    D: Optional[float] = None
    max_k: int = 4
    r_max: int = 3
    tol: Optional[float] = None
    all_primes: bool = False
    centering: str = "loglog"
    study: Optional[str] = None
    a_schedule: Optional[list] = None
    n_cap: int = 10**7
    path: Optional[list] = None
    s_values: Optional[list] = None
    out: str = "ek-out"
    cache_dir: Optional[str] = None
    threads: Optional[int] = None  # None: available parallelism

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.family is not None:
            self.family = format_family(parse_family(self.family))

    def to_text(self) -> str:
        """Canonical ``key=value`` lines (unset keys omitted)."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or value == f.default and f.name != "command":
                continue
            lines.append(f"{f.name}={_encode(f.name, value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, raw = line.partition("=")
            key = key.strip()
            if not eq:
                raise UsageError(f"line {lineno}: expected key=value")
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            values[key] = _decode(key, raw.strip())
        if "command" not in values:
            raise UsageError("config needs command=")
        return cls(**values)


_INT_KEYS = {"n", "cutoff", "p", "q", "max_k", "r_max", "n_cap", "threads"}
_FLOAT_KEYS = {"C", "D", "tol"}


def _encode(key, value) -> str:
    if key == "schedule":
        return ",".join(str(v) for v in value)
    if key in ("a_schedule", "s_values"):
        return ",".join(repr(float(v)) for v in value)
    if key == "path":
        return ",".join(f"{float(s)!r}:{float(a)!r}" for s, a in value)
    if key in _FLOAT_KEYS:
        return repr(float(value))
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _decode(key, raw):
    try:
        if key == "schedule":
            return _parse_list(raw, _parse_int)
        if key in ("a_schedule", "s_values"):
            return _parse_list(raw, float)
        if key == "path":
            return _parse_path(raw)
        if key in _INT_KEYS:
            return _parse_int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "all_primes":
            if raw not in ("true", "false"):
                raise UsageError(f"all_primes must be true or false, got {raw!r}")
            return raw == "true"
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {exc}") from None
    return raw


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            out = []
            for col in columns:
                v = row[col]
                if v is None:
                    out.append("")
                elif isinstance(v, bool):
                    out.append("true" if v else "false")
                elif isinstance(v, float):
                    out.append(_fmt_float(v))
                else:
                    out.append(str(v))
            writer.writerow(out)


def _write_json(path: Path, payload: dict) -> None:
    payload = {"schema": SCHEMA, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


class _Run:
    def __init__(self, config: RunConfig):
        self.config = config
        self.out = Path(config.out)
        self.out.mkdir(parents=True, exist_ok=True)
        cache = config.cache_dir or os.environ.get(CACHE_ENV)
        self.cache_dir = Path(cache) if cache else None
        self.threads = config.threads or os.cpu_count() or 1
        self.outputs = []
        self.cache_events = []

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def need(self, *keys):
        missing = [k for k in keys if getattr(self.config, k) is None]
        if missing:
            raise UsageError(f"{self.config.command} needs --{missing[0].replace('_', '-')}")

    def omega(self, n: int, cutoff: Optional[int] = None):
        if self.cache_dir is None:
            return build_omega_table(n, cutoff, threads=self.threads)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        stem = f"omega-{n}-{cutoff if cutoff is not None else 'none'}"
        data, sidecar = self.cache_dir / f"{stem}.ekw", self.cache_dir / f"{stem}.sha256"
        if data.exists():
            if not sidecar.exists():
                raise IntegrityError(f"{data}: no recorded digest")
            expected = sidecar.read_text().strip()
            digest = file_digest(data)
            if digest != expected:
                raise IntegrityError(f"{data}: digest {digest} does not match recorded {expected}")
            table = load_omega_table(data)
            if table.limit != n or table.cutoff != cutoff:
                raise IntegrityError(f"{data}: header does not match its name")
            self.cache_events.append({"file": str(data), "sha256": digest, "action": "loaded"})
            return table
        table = build_omega_table(n, cutoff, threads=self.threads)
        dump_omega_table(table, data)
        digest = file_digest(data)
        sidecar.write_text(digest + "\n")
        self.cache_events.append({"file": str(data), "sha256": digest, "action": "written"})
        return table

    # commands return the exit status

    def sieve(self):
        self.need("n")
        c = self.config
        table = self.omega(c.n, c.cutoff)
        bound = c.n if c.cutoff is None else c.cutoff
        hist = [int(x) for x in np.bincount(table.values)]
        _write_json(self.path("sieve.json"), {
            "limit": c.n, "cutoff": c.cutoff, "prime_count": sieve_primes(bound).count,
            "max_count": len(hist) - 1, "histogram": hist})
        return EXIT_OK

    def pmf(self):
        self.need("family", "n")
        c = self.config
        pmf = make_pmf(parse_family(c.family), c.n)
        eps = pmf.epsilons()
        rows = ({"i": i, "pmf": float(v), "epsilon": float(e)}
                for i, (v, e) in enumerate(zip(pmf.values, eps), start=1))
        _write_csv(self.path("pmf.csv"), ["i", "pmf", "epsilon"], rows)
        _write_json(self.path("pmf.json"), {
            "family": c.family, "n": c.n, "normalizer": pmf.normalizer, "total": pmf.total(),
            "epsilon_sum": csum(eps), "max_abs_epsilon": float(abs(eps).max()),
            "epsilon_in_range": bool(((eps >= -1.0 / c.n) & (eps <= 1 - 1.0 / c.n)).all())})
        return EXIT_OK

    def check(self):
        self.need("family", "n")
        c = self.config
        spec = parse_family(c.family)
        pmf = make_pmf(spec, c.n)
        r4 = check_c4(pmf, 1.0 if c.C is None else c.C, all_primes=c.all_primes)
        r5 = check_c5(pmf, 1.0 if c.D is None else c.D, c.max_k)
        cols = ["n", "d_or_p", "k", "eps_sum", "bound", "pass"]
        _write_csv(self.path("check_c4.csv"), cols, r4.rows())
        _write_csv(self.path("check_c5.csv"), cols, r5.rows())
        summary = {"family": c.family, "c4": r4.summary(), "c5": r5.summary(),
                   "C_asserted": c.C is not None, "D_asserted": c.D is not None}
        if c.schedule:
            trend = check_c6(spec, c.p or 2, c.schedule, **({"tol": c.tol} if c.tol else {}))
            summary["c6"] = trend.summary()
        _write_json(self.path("check.json"), summary)
        failed = (c.C is not None and not r4.passed) or (c.D is not None and not r5.passed)
        return EXIT_FAILED if failed else EXIT_OK

    def moments(self):
        self.need("family")
        c = self.config
        schedule = c.schedule or ([c.n] if c.n else None)
        if not schedule:
            raise UsageError("moments needs --schedule or --n")
        tables = moment_gap_study(parse_family(c.family), schedule, c.r_max)
        rows = [row for t in tables for row in t.rows()]
        _write_csv(self.path("moments.csv"), ["n", "cutoff", "r", "model", "weighted", "gap"], rows)
        _write_json(self.path("moments.json"), {"family": c.family, "tables": [
            {"n": t.n, "cutoff": t.cutoff, "alpha": t.alpha, "b": t.b, "a2": t.a2,
             "b_le_alpha": t.b_le_alpha, "gaps": t.gaps} for t in tables]})
        return EXIT_OK

    def cdf(self):
        self.need("family", "n")
        c = self.config
        pmf = make_pmf(parse_family(c.family), c.n)
        omega = self.omega(c.n)
        masses = mass_by_value(pmf, omega)
        study = standardized_cdf(pmf, omega, c.centering, masses=masses)
        csv_path = self.path("cdf.csv")
        _write_csv(csv_path, ["x", "empirical_cdf", "normal_cdf", "diff"], study.rows())
        write_gnuplot(csv_path, self.path("cdf.gp"), f"{c.family}, n={c.n}")
        _write_json(self.path("cdf.json"), {
            "family": c.family, "n": c.n, "centering": study.mode, "center": study.center,
            "scale": study.scale, "ks": study.ks, "mean_ratio": mean_ratio(pmf, omega, masses),
            "note": "convergence in n is at log log rate; single-n values are not limits"})
        return EXIT_OK

    def limits(self):
        c = self.config
        study = c.study or "zeta"
        if study == "zeta":
            self.need("a_schedule")
            result = zeta_sequence_study(c.a_schedule, c.n_cap, c.p or 2, c.max_k)
            cols = ["j", "s", "alpha", "mu", "n_j", "capped", "minimal_C", "minimal_D",
                    "eps_sum_p", "ks", "mean_ratio"]
            _write_csv(self.path("limits.csv"), cols, result.rows())
            _write_json(self.path("limits.json"), {"study": study, "p": result.p, "n_cap": result.n_cap,
                        "points": [dataclasses.asdict(pt) for pt in result.points]})
        elif study == "lz":
            self.need("path", "n")
            points = lz_limit_study(c.path, c.n, c.p or 2, self.omega(c.n))
            cols = ["s", "alpha", "n", "p", "eps_sum_p", "limit", "bound", "bound_ok", "ks",
                    "truncated_mean", "mean_ratio"]
            _write_csv(self.path("lz.csv"), cols, [pt.row() for pt in points])
        elif study == "dependence":
            self.need("s_values")
            rows = []
            for s in c.s_values:
                g = log_dependence(s, c.p or 2, c.q or 3)
                rows.append({"s": g.s, "p": g.p, "q": g.q, "marginal_p": g.marginal_p,
                             "marginal_q": g.marginal_q, "joint": g.joint, "gap": g.gap})
            _write_csv(self.path("dependence.csv"), list(rows[0]), rows)
        else:
            raise UsageError(f"unknown study {study!r} (zeta, lz, dependence)")
        return EXIT_OK

    def control(self):
        self.need("schedule")
        c = self.config
        trend = nonexample_control(c.schedule, c.p or 2)
        _write_csv(self.path("control.csv"), ["n", "eps_sum"],
                   [{"n": n, "eps_sum": v} for n, v in zip(trend.schedule, trend.values)])
        _write_json(self.path("control.json"), {"expected_tail": -1.0 / trend.p, **trend.summary()})
        return EXIT_OK if trend.verdict == "converging-to-zero" else EXIT_FAILED


def run(config: RunConfig):
    """Execute one command; returns ``(manifest, exit_status)``."""
    start = time.perf_counter()
    runner = _Run(config)
    status = getattr(runner, config.command)()
    manifest = {
        "config": config.to_text(),
        "version": __version__,
        "wall_time_s": time.perf_counter() - start,
        "cache": runner.cache_events,
        "outputs": runner.outputs,
        "exit_status": status,
    }
    _write_json(runner.out / "manifest.json", manifest)
    return manifest, status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eklab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("--out", help="output directory (default ek-out)")
        p.add_argument("--cache-dir", help=f"sieve cache directory (or ${CACHE_ENV})")
        p.add_argument("--threads", type=int, help="worker threads for sieving")
        return p

    p = common(sub.add_parser("sieve", help="build and cache an omega table"))
    p.add_argument("--n", type=_parse_int)
    p.add_argument("--cutoff", type=_parse_int)

    p = common(sub.add_parser("pmf", help="dump a truncated PMF and its eps values"))
    p.add_argument("--family")
    p.add_argument("--n", type=_parse_int)

    p = common(sub.add_parser("check", help="check the eps-sum constraints"))
    p.add_argument("--family")
    p.add_argument("--n", type=_parse_int)
    p.add_argument("--C", type=float, dest="C")
    p.add_argument("--D", type=float, dest="D")
    p.add_argument("--max-k", type=int, dest="max_k")
    p.add_argument("--all-primes", action="store_const", const=True, dest="all_primes")
    p.add_argument("--p", type=int)
    p.add_argument("--schedule", type=lambda t: _parse_list(t, _parse_int))
    p.add_argument("--tol", type=float)

    p = common(sub.add_parser("moments", help="Bernoulli-model vs weighted g_n moments"))
    p.add_argument("--family")
    p.add_argument("--n", type=_parse_int)
    p.add_argument("--schedule", type=lambda t: _parse_list(t, _parse_int))
    p.add_argument("--r-max", type=int, dest="r_max")

    p = common(sub.add_parser("cdf", help="standardized omega CDF and KS distance"))
    p.add_argument("--family")
    p.add_argument("--n", type=_parse_int)
    p.add_argument("--centering", choices=["loglog", "model"])

    p = common(sub.add_parser("limits", help="sequence studies (zeta, lz, dependence)"))
    p.add_argument("--study", choices=["zeta", "lz", "dependence"])
    p.add_argument("--a-schedule", type=lambda t: _parse_list(t, float), dest="a_schedule")
    p.add_argument("--n-cap", type=_parse_int, dest="n_cap")
    p.add_argument("--n", type=_parse_int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--max-k", type=int, dest="max_k")
    p.add_argument("--path", type=_parse_path)
    p.add_argument("--s-values", type=lambda t: _parse_list(t, float), dest="s_values")

    p = common(sub.add_parser("control", help="zeroed-at-p negative control"))
    p.add_argument("--p", type=int)
    p.add_argument("--schedule", type=lambda t: _parse_list(t, _parse_int))
    return parser


def config_from_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        base = RunConfig.from_text(Path(args.config).read_text())
        if base.command != args.command:
            raise UsageError(f"config is for {base.command!r}, not {args.command!r}")
        values = {f.name: getattr(base, f.name) for f in fields(base)}
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            values[key] = value
    return RunConfig(**values)


def main(argv=None) -> int:
    try:
        config = config_from_args(sys.argv[1:] if argv is None else argv)
        _, status = run(config)
        return status
    except EKError as exc:
        print(f"eklab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:
        # argparse usage errors exit with 2; map them to the error status
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
