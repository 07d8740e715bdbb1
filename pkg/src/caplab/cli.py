"""Command-line experiment harness.

Each command computes its rows first, then writes the CSV atomically and a
JSON manifest `<out>.manifest.json` alongside; rerunning a manifest (via
--config) reproduces the CSV byte for byte. Floats are printed with 12
significant digits. CAPLAB_THREADS caps worker parallelism.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, capacities, channels, protocol, qmath


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if v == 0.0:
        v = 0.0  # normalize -0.0
    return format(v, ".12g")


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _workers() -> int:
    raw = os.environ.get("CAPLAB_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ConfigError(f"CAPLAB_THREADS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ConfigError(f"CAPLAB_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _load_config(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config: top-level JSON value must be an object")
    # A manifest written by a previous run embeds its config; unwrap it.
    if "config" in doc and isinstance(doc["config"], dict):
        doc = doc["config"]
    return doc


def _merge(args: argparse.Namespace, keys: list[str]) -> dict:
    """Resolve the run configuration: config-file values, overridden by
    any flag given on the command line."""
    cfg = {}
    if args.config:
        file_cfg = _load_config(args.config)
        cmd = file_cfg.get("command")
        if cmd is not None and cmd != args.command:
            raise ConfigError(
                f"command: config file is for {cmd!r}, invoked as {args.command!r}"
            )
        for key, value in file_cfg.items():
            if key == "command":
                continue
            if key not in keys:
                raise ConfigError(f"{key}: unknown config key for {args.command}")
            cfg[key] = value
    for key in keys:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            cfg[key] = flag
    cfg["command"] = args.command
    return cfg


def _require(cfg: dict, key: str, kind, cond=None, what: str = ""):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(f"{key}: required field is missing")
    try:
        value = kind(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {cfg[key]!r}") from exc
    if cond is not None and not cond(value):
        raise ConfigError(f"{key}: {what}, got {value!r}")
    cfg[key] = value
    return value


def _optional(cfg: dict, key: str, kind, default, cond=None, what: str = ""):
    if cfg.get(key) is None:
        cfg[key] = default
        return default
    return _require(cfg, key, kind, cond, what)


def _finish(cfg: dict, header: list[str], rows: list[list[str]], summary: dict, t0: float) -> None:
    out = Path(cfg["out"])
    _write_atomic(out, _csv_text(header, rows))
    manifest = {
        "artifact": "caplab",
        "version": __version__,
        "command": cfg["command"],
        "config": cfg,
        "csv": out.name,
        "duration_seconds": round(time.time() - t0, 3),
        "summary": summary,
    }
    _write_atomic(
        out.with_name(out.name + ".manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )


CHANNEL_KINDS = ("erasure", "identity", "depolarizing", "dephasing")


def _build_channel(cfg: dict) -> tuple[channels.QuantumChannel, str]:
    kind = _require(cfg, "channel", str, lambda k: k in CHANNEL_KINDS,
                    f"must be one of {', '.join(CHANNEL_KINDS)}")
    if kind == "identity":
        dim = _require(cfg, "dim", int, lambda d: d >= 1, "must be >= 1")
        cfg.pop("p", None)
        return channels.identity_channel(dim), ""
    p = _require(cfg, "p", float, lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]")
    if kind == "erasure":
        dim = _require(cfg, "dim", int, lambda d: d >= 1, "must be >= 1")
        return channels.erasure_channel(dim, p), _fmt(p)
    cfg.pop("dim", None)
    if kind == "depolarizing":
        return channels.depolarizing_channel(p), _fmt(p)
    return channels.dephasing_channel(p), _fmt(p)


def cmd_capacity(cfg: dict, t0: float) -> None:
    chan, parameter = _build_channel(cfg)
    restarts = _optional(cfg, "restarts", int, 8, lambda r: r >= 1, "must be >= 1")
    m = _optional(cfg, "m", int, chan.in_dim**2,
                  lambda v: v >= chan.in_dim**2,
                  f"must be >= in_dim^2 = {chan.in_dim ** 2}")
    tol = _optional(cfg, "tol", float, 1e-7, lambda v: v > 0, "must be positive")
    seed = _require(cfg, "seed", int, lambda s: s >= 0, "must be >= 0")
    _require(cfg, "out", str)
    chi = capacities.maximize_holevo(
        chan, m=m, restarts=restarts, tol=tol, seed=qmath.derive_seed(seed, 0)
    )
    q1 = capacities.maximize_coherent(
        chan, restarts=restarts, tol=tol, seed=qmath.derive_seed(seed, 1)
    )
    p1 = capacities.maximize_private(
        chan, m=m, restarts=restarts, tol=tol, seed=qmath.derive_seed(seed, 2)
    )
    header = ["channel", "parameter", "chi_hat", "q1_hat", "p1_hat",
              "restarts", "converged", "seed"]
    rows = [[
        cfg["channel"], parameter, _fmt(chi.value), _fmt(q1.value), _fmt(p1.value),
        _fmt(restarts), _fmt(chi.converged and q1.converged and p1.converged),
        _fmt(seed),
    ]]
    summary = {"chi_hat": chi.value, "q1_hat": q1.value, "p1_hat": p1.value}
    _finish(cfg, header, rows, summary, t0)


def cmd_retro_sim(cfg: dict, t0: float) -> None:
    d = _require(cfg, "d", int, lambda v: v >= 2, "must be >= 2")
    c = _require(cfg, "c", int, lambda v: v >= 1, "must be >= 1")
    p = _require(cfg, "p", float, lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]")
    trials = _require(cfg, "trials", int, lambda v: v >= 1, "must be >= 1")
    seed = _require(cfg, "seed", int, lambda s: s >= 0, "must be >= 0")
    _require(cfg, "out", str)
    est = protocol.joint_coherent_info(d, c, p, trials, seed, workers=_workers())
    header = ["trial", "seed", "d", "c", "p",
              "not_erased", "erased", "joint_at_p", "mean", "std_error"]
    rows = []
    for k, bv in enumerate(est.per_trial):
        rows.append([
            _fmt(k), _fmt(bv.instance_seed), _fmt(d), _fmt(c), _fmt(p),
            _fmt(bv.not_erased), _fmt(bv.erased), _fmt(bv.joint(p)), "", "",
        ])
    rows.append([
        "summary", _fmt(seed), _fmt(d), _fmt(c), _fmt(p),
        "", "", "", _fmt(est.mean_joint), _fmt(est.std_error),
    ])
    summary = {
        "mean_joint": est.mean_joint,
        "std_error": est.std_error,
        "mean_erased": est.mean_erased,
    }
    _finish(cfg, header, rows, summary, t0)


def _parse_c_list(raw) -> list[int]:
    if isinstance(raw, (list, tuple)):
        values = [int(v) for v in raw]
    else:
        try:
            values = [int(tok) for tok in str(raw).split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"c: expected comma-separated integers, got {raw!r}") from exc
    if not values or any(v < 1 for v in values):
        raise ConfigError(f"c: entries must be >= 1, got {raw!r}")
    return values


def cmd_chi_scan(cfg: dict, t0: float) -> None:
    d = _require(cfg, "d", int, lambda v: v >= 2, "must be >= 2")
    if "c" not in cfg or cfg["c"] is None:
        raise ConfigError("c: required field is missing")
    c_values = _parse_c_list(cfg["c"])
    cfg["c"] = c_values
    instances = _require(cfg, "instances", int, lambda v: v >= 1, "must be >= 1")
    restarts = _optional(cfg, "restarts", int, 2, lambda r: r >= 1, "must be >= 1")
    tol = _optional(cfg, "tol", float, 1e-6, lambda v: v > 0, "must be positive")
    max_iters = _optional(cfg, "max-iters", int, 200, lambda v: v >= 1, "must be >= 1")
    seed = _require(cfg, "seed", int, lambda s: s >= 0, "must be >= 0")
    _require(cfg, "out", str)

    jobs = [(c, k, qmath.derive_seed(seed, c, k)) for c in c_values for k in range(instances)]

    def run(job):
        c, _, inst_seed = job
        inst = channels.sample_retro_instance(d, c, inst_seed)
        report = capacities.maximize_holevo(
            channels.retro_fixed_channel(inst),
            restarts=restarts, tol=tol, seed=inst_seed, max_iters=max_iters,
        )
        return report.value

    workers = _workers()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run, jobs))
    else:
        values = [run(job) for job in jobs]

    header = ["d", "c", "instance_seed", "chi_hat"]
    rows = [
        [_fmt(d), _fmt(c), _fmt(inst_seed), _fmt(value)]
        for (c, _, inst_seed), value in zip(jobs, values)
    ]
    medians = {
        str(c): float(np.median([v for (cc, _, _), v in zip(jobs, values) if cc == c]))
        for c in c_values
    }
    _finish(cfg, header, rows, {"median_chi_hat": medians}, t0)


def _parse_p_grid(raw) -> np.ndarray:
    parts = str(raw).split(":")
    if len(parts) != 3:
        raise ConfigError(f"p-grid: expected start:stop:step, got {raw!r}")
    try:
        start, stop, step = (float(tok) for tok in parts)
    except ValueError as exc:
        raise ConfigError(f"p-grid: non-numeric entry in {raw!r}") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"p-grid: need stop >= start and step > 0, got {raw!r}")
    if start < 0.0 or stop > 1.0:
        raise ConfigError(f"p-grid: grid must lie within [0, 1], got {raw!r}")
    count = int(round((stop - start) / step))
    if abs(start + count * step - stop) > 1e-9:
        raise ConfigError(f"p-grid: step does not divide the range in {raw!r}")
    return np.linspace(start, stop, count + 1)


def cmd_fig3(cfg: dict, t0: float) -> None:
    if "p-grid" not in cfg or cfg["p-grid"] is None:
        raise ConfigError("p-grid: required field is missing")
    grid = _parse_p_grid(cfg["p-grid"])
    cfg["p-grid"] = str(cfg["p-grid"])
    _require(cfg, "out", str)
    header = ["p", "joint_rate", "erasure_alone", "retro_alone_upper"]
    rows = []
    for p in grid:
        rows.append([
            _fmt(p),
            _fmt(1.0 - p),
            _fmt(max(0.0, 1.0 - 2.0 * p)),
            _fmt(0.0),
        ])
    _finish(cfg, header, rows, {"points": len(rows)}, t0)


_HANDLERS = {
    "capacity": (cmd_capacity,
                 ["channel", "dim", "p", "restarts", "m", "tol", "seed", "out"]),
    "retro-sim": (cmd_retro_sim, ["d", "c", "p", "trials", "seed", "out"]),
    "chi-scan": (cmd_chi_scan,
                 ["d", "c", "instances", "restarts", "tol", "max-iters", "seed", "out"]),
    "fig3": (cmd_fig3, ["p-grid", "out"]),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caplab",
        description="Channel capacity estimates and retro/erasure protocol sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"caplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    cap = sub.add_parser("capacity", help="estimate chi, Q1 and P1 for one channel")
    cap.add_argument("--channel", choices=CHANNEL_KINDS)
    cap.add_argument("--dim", type=int)
    cap.add_argument("--p", type=float)
    cap.add_argument("--restarts", type=int)
    cap.add_argument("--m", type=int)
    cap.add_argument("--tol", type=float)

    retro = sub.add_parser("retro-sim", help="sample the two-branch protocol values")
    retro.add_argument("--d", type=int)
    retro.add_argument("--c", type=int)
    retro.add_argument("--p", type=float)
    retro.add_argument("--trials", type=int)

    scan = sub.add_parser("chi-scan", help="chi estimates of sampled fixed instances")
    scan.add_argument("--d", type=int)
    scan.add_argument("--c", help="comma-separated control dimensions, e.g. 2,8,32")
    scan.add_argument("--instances", type=int)
    scan.add_argument("--restarts", type=int)
    scan.add_argument("--tol", type=float)
    scan.add_argument("--max-iters", dest="max_iters", type=int)

    fig3 = sub.add_parser("fig3", help="closed-form normalized rate curves")
    fig3.add_argument("--p-grid", dest="p_grid", help="start:stop:step, e.g. 0:1:0.01")

    for name, p in (("capacity", cap), ("retro-sim", retro), ("chi-scan", scan), ("fig3", fig3)):
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--config", help="JSON config or a manifest from a previous run")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler, keys = _HANDLERS[args.command]
    t0 = time.time()
    try:
        cfg = _merge(args, keys)
        handler(cfg, t0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
