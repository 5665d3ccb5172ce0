"""Command line entry point: ``twistlab <subcommand> CONFIG [flags]``.

Exit codes: 0 success, 1 an invariant check failed, 2 configuration error,
3 a bounded search finished without resolving every target.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .acceptance import LEVELS, verify_suite
from .config import ConfigError, data_path, load_experiment
from .experiments import CONFIG_ERROR, OK, RUNNERS, VIOLATION, Result, jsonable


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _resolve_config(name: str) -> Path:
    p = Path(name)
    if p.exists() or name.endswith(".toml"):
        return p
    shipped = data_path(f"exp-{name}.toml")
    return shipped if shipped.exists() else p


def payload_bytes(res: Result) -> bytes:
    doc = {"kind": res.kind, "status": res.status, "provenance": res.provenance,
           "result": res.payload}
    return (json.dumps(jsonable(doc), indent=2, sort_keys=True) + "\n").encode()


def write_reports(res: Result, name: str, out: Path, manifest: dict) -> list:
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    body = payload_bytes(res)
    p = out / f"{name}.json"
    p.write_bytes(body)
    paths.append(p)
    if res.header:
        p = out / f"{name}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(res.header)
            w.writerows(res.rows)
        paths.append(p)
    manifest["payload_sha256"] = hashlib.sha256(body).hexdigest()
    p = out / f"{name}.manifest.json"
    p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    paths.append(p)
    return paths


def run(command: str, config: str, seed=None, precision_bits=None, workers: int = 1,
        out: Path | None = None, echo=print) -> int:
    """Run one experiment file; returns the exit status."""
    expected_kind, runner = RUNNERS[command]
    started = _now()
    try:
        cfg = load_experiment(_resolve_config(config), seed, precision_bits)
        if cfg.kind != expected_kind:
            raise ConfigError(f"{cfg.path}: kind '{cfg.kind}' cannot run under '{command}' "
                              f"(expects '{expected_kind}')")
        t0 = time.perf_counter()
        res = runner(cfg, workers)
        elapsed = time.perf_counter() - t0
    except ConfigError as exc:
        echo(f"config error: {exc}")
        return CONFIG_ERROR
    for line in res.lines:
        echo(line)
    if out is not None:
        manifest = {"tool": "twistlab", "version": __version__, "command": command,
                    "config": str(cfg.path), "config_sha256": cfg.digest, "seed": cfg.seed,
                    "precision_bits": cfg.bits, "workers": workers, "started": started,
                    "finished": _now(), "seconds": round(elapsed, 3), "status": res.status,
                    "provenance": res.provenance}
        for p in write_reports(res, cfg.name, Path(out), manifest):
            echo(f"wrote {p}")
    return res.status


def _add_globals(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(None), help="override the config seed")
    p.add_argument("--precision-bits", type=int, default=d(None),
                   help="fixed-point bits for irrational coordinates (default 256)")
    p.add_argument("--workers", type=int, default=d(1), help="worker processes")
    p.add_argument("--out", type=Path, default=d(None), help="directory for CSV/JSON reports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"twistlab {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"equidist": "Cesaro averages of a character along a random walk",
             "irred": "span-closure irreducibility certificate",
             "bohr": "Bohr set members, rational spectrum and C - C witness",
             "density": "window densities of a set",
             "pattern": "search for k, b with Psi(kF) in Psi(E - b)",
             "surject": "witnesses for Psi(v) = y with v in a Bohr_0 set",
             "recur": "twisted recurrence search on a Kronecker system",
             "galois": "Galois labels of characteristic polynomials"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="experiment file, or the name of a shipped one")
        _add_globals(p, suppress=True)
    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--level", choices=LEVELS, default="smoke")
    _add_globals(p, suppress=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        started = _now()
        results = verify_suite(args.level)
        status = OK if all(r.passed for r in results) else VIOLATION
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            doc = {"level": args.level,
                   "criteria": [{"number": r.number, "title": r.title, "passed": r.passed,
                                 "detail": r.detail} for r in results]}
            body = json.dumps(doc, indent=2, sort_keys=True) + "\n"
            (args.out / f"verify-{args.level}.json").write_text(body)
            manifest = {"tool": "twistlab", "version": __version__, "command": "verify",
                        "level": args.level, "started": started, "finished": _now(),
                        "status": status,
                        "payload_sha256": hashlib.sha256(body.encode()).hexdigest()}
            (args.out / f"verify-{args.level}.manifest.json").write_text(
                json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return status
    return run(args.command, args.config, args.seed, args.precision_bits, args.workers, args.out)


if __name__ == "__main__":
    sys.exit(main())
