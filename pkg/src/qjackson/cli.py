"""Command-line runner for the verification suites.

Exit codes: 0 all checks passed, 1 some check failed, 2 configuration error,
3 some sum did not converge (and nothing failed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace

from .lattice import NotConverged
from .qcore import NonFinite, QContext
from .verify import REGISTRY, SUITES, CheckReport, check_identity, checks_in_suite

DEFAULT_DIMS = {"mg": (1, 2, 3), "da": (1, 2, 3), "gus": (1, 2)}
FORMATS = ("json", "csv", "text")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    suites: tuple = ("all",)
    n_values: tuple | None = None
    q: float = 0.5
    seed: int = 0
    trials: int = 10
    tol: float | None = None
    cutoff: int | None = None
    report_path: str | None = None
    format: str = "json"
    workers: int = 1

    def validate(self) -> "RunConfig":
        if not self.suites:
            raise ConfigError("no suites selected")
        for s in self.suites:
            if s not in SUITES and s != "all":
                raise ConfigError(f"unknown suite {s!r}")
        if self.n_values is not None and (not self.n_values or min(self.n_values) < 1):
            raise ConfigError("dimensions must be positive integers")
        if not 0.0 < self.q < 1.0:
            raise ConfigError("q must lie in (0, 1)")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.trials < 1 or self.workers < 1:
            raise ConfigError("trials and workers must be positive")
        if self.cutoff is not None and self.cutoff < 1:
            raise ConfigError("cutoff must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        self.context()
        return self

    def context(self) -> QContext:
        changes = {"q": self.q}
        if self.tol is not None:
            changes["identity_tol"] = self.tol
        if self.cutoff is not None:
            changes.update(lattice_cutoff=self.cutoff, adaptive=False)
        try:
            return QContext(**changes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"not a list of integers: {text!r}") from exc


def _name_list(text: str) -> tuple:
    return tuple(t.strip() for t in text.split(",") if t.strip())


# flag / config-file key -> (RunConfig field, parser)
KEYS = {
    "suites": ("suites", _name_list),
    "n": ("n_values", _int_list),
    "q": ("q", float),
    "seed": ("seed", int),
    "trials": ("trials", int),
    "tol": ("tol", float),
    "cutoff": ("cutoff", int),
    "report": ("report_path", str),
    "format": ("format", str),
    "workers": ("workers", int),
}


def read_config_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    out = {}
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-")
        if not sep:
            raise ConfigError(f"{path}:{number}: expected key=value")
        if key not in KEYS:
            raise ConfigError(f"{path}:{number}: unknown key {key!r}")
        out[key] = value.strip()
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qjackson", description="Verify Jackson integral evaluations numerically.")
    p.add_argument("--suites", help="comma list from: " + ", ".join(SUITES + ("all",)))
    p.add_argument("--n", help="comma list of dimensions")
    p.add_argument("--q", help="base q in (0, 1)")
    p.add_argument("--seed", help="base seed; trial t uses seed + t")
    p.add_argument("--trials", help="random draws per check and dimension")
    p.add_argument("--tol", help="identity tolerance for n <= 2 (n = 3 uses 100x)")
    p.add_argument("--cutoff", help="fixed, non-adaptive box half-width")
    p.add_argument("--report", help="write the report here instead of stdout")
    p.add_argument("--format", help="json, csv or text")
    p.add_argument("--workers", help="threads per lattice sum")
    p.add_argument("--config", help="file of key=value lines; flags override it")
    return p


def parse_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    raw = read_config_file(args["config"]) if args.get("config") else {}
    raw.update({k: v for k, v in args.items() if k != "config" and v is not None})
    values = {}
    for key, text in raw.items():
        name, conv = KEYS[key]
        try:
            values[name] = conv(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {text!r}") from exc
    return RunConfig(**values).validate()


def planned_checks(config: RunConfig) -> list[tuple[str, int]]:
    """(check id with dimension, trial seed) pairs in canonical order."""
    bases = sorted({cid for s in config.suites for cid in checks_in_suite(s)})
    plan = []
    for base in bases:
        dims = REGISTRY[base].dims
        if base.startswith("core."):
            wanted = dims
        else:
            wanted = config.n_values or DEFAULT_DIMS[base.split(".", 1)[0]]
        for n in sorted(set(wanted) & set(dims)):
            for t in range(config.trials):
                plan.append((f"{base}.n{n}", config.seed + t))
    return sorted(plan, key=lambda item: (item[0], item[1] - config.seed))


def _fmt(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def to_json(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, complex):
        return to_json([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def render(reports: list[CheckReport], fmt: str) -> str:
    rows = [asdict(r) for r in reports]
    if fmt == "json":
        if not rows:
            return "[]\n"
        return "[\n" + ",\n".join("  " + to_json(r) for r in rows) + "\n]\n"
    if fmt == "csv":
        buf = io.StringIO()
        names = [f.name for f in fields(CheckReport)]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for r in rows:
            writer.writerow([to_json(r[k]) if not isinstance(r[k], str) else r[k] for k in names])
        return buf.getvalue()
    return "".join(f"{r.check_id} {r.rel_dev:.3e} {'PASS' if r.passed else 'FAIL'}\n" for r in reports)


def run(config: RunConfig) -> int:
    ctx = config.context()
    reports, failed, unconverged = [], False, False
    for check_id, seed in planned_checks(config):
        try:
            report = check_identity(check_id, ctx, seed=seed, workers=config.workers)
        except NotConverged as exc:
            print(f"{check_id} seed={seed}: not converged: {exc}", file=sys.stderr)
            unconverged = True
            continue
        except NonFinite as exc:
            print(f"{check_id} seed={seed}: non-finite value: {exc}", file=sys.stderr)
            failed = True
            continue
        # wall-clock time would make reports differ run to run
        reports.append(replace(report, elapsed_ms=0))
        failed |= not report.passed
    text = render(reports, config.format)
    if config.report_path:
        with open(config.report_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if failed:
        return EXIT_FAIL
    return EXIT_NOT_CONVERGED if unconverged else EXIT_OK


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"qjackson: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
