"""Command-line entry point.

Subcommands: ``sample``, ``schedule``, ``audit``, ``accuracy``,
``complexity``, ``dist``. Every command writes its outputs plus a
``manifest.json`` (full effective config and library version) into the output
directory; reruns with the same manifest reproduce the outputs byte for
byte. ``DPSAMPLER_THREADS`` caps Monte Carlo worker threads and never
changes results.

Exit codes: 0 success (audit passed), 1 audit failed, 2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    AccuracyPoint,
    accuracy_sweep,
    audit_mechanism,
    composition_count,
    exact_marginal_output,
    mc_marginal_output,
    DEFAULT_EXACT_CAP,
)
from .baseline import LaplaceParams, complexity_comparison, laplace_sample
from .core import CountVector, PrivacyBudget, RandomStream, min_count
from .dsroo import DsRooConditional, build_schedule, dsroo_sample
from .files import load_counts, load_distribution, save_schedule_csv
from .roo import RooConditional, roo_q_for_epsilon, roo_sample

EXIT_OK = 0
EXIT_AUDIT_FAIL = 1
EXIT_INPUT_ERROR = 2

MECHS = ("roo", "dsroo", "laplace")


class InputError(Exception):
    """Bad file, flag, or config content; maps to exit code 2."""


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out_dir: Path, command: str, config: dict, derived: dict | None = None) -> None:
    manifest = {
        "command": command,
        "config": config,
        "derived": derived or {},
        "version": __version__,
    }
    _write_json(out_dir / "manifest.json", manifest)


def _merge_config(args: argparse.Namespace, keys: list[str]) -> dict:
    """Config-file values fill in flags left unset; explicit flags win."""
    merged = {}
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}")
        if not isinstance(file_cfg, dict):
            raise InputError(f"config {args.config} must be a JSON object")
    for key in keys:
        value = getattr(args, key, None)
        if value is None and key in file_cfg:
            value = file_cfg[key]
        merged[key] = value
    return merged


def _require(cfg: dict, *keys: str) -> None:
    for key in keys:
        if cfg.get(key) is None:
            raise InputError(f"missing required option --{key}")


def _epsilon_list(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        eps = [float(v) for v in value]
    else:
        eps = [float(tok) for tok in str(value).split(",") if tok.strip()]
    if not eps or any(e <= 0 for e in eps):
        raise InputError("epsilon values must be positive")
    return eps


def _mech_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        tags = [str(v) for v in value]
    else:
        tags = [tok.strip() for tok in str(value).split(",") if tok.strip()]
    for tag in tags:
        if tag not in MECHS:
            raise InputError(f"unknown mechanism {tag!r}; expected one of {MECHS}")
    return tags


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_dataset(cfg: dict) -> CountVector:
    _require(cfg, "input")
    k = int(cfg["k"]) if cfg.get("k") is not None else None
    try:
        return load_counts(cfg["input"], k=k)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc))


def cmd_sample(cfg: dict) -> int:
    _require(cfg, "mech", "seed")
    mech = cfg["mech"]
    if mech not in MECHS:
        raise InputError(f"unknown mechanism {mech!r}")
    d = _load_dataset(cfg)
    trials = int(cfg.get("trials") or 1)
    if trials < 1:
        raise InputError("trials must be at least 1")
    rng = RandomStream(int(cfg["seed"]))
    out = _out_dir(cfg)
    derived: dict = {"n": d.n, "k": d.k}

    if mech == "roo":
        if cfg.get("q") is not None:
            q = float(cfg["q"])
            if not 0.0 <= q <= 1.0:
                raise InputError("q must lie in [0, 1]")
        else:
            _require(cfg, "epsilon")
            q = roo_q_for_epsilon(float(cfg["epsilon"]), d.n, d.k)
        derived["q"] = q
        letters = [roo_sample(d, q, rng) for _ in range(trials)]
    elif mech == "dsroo":
        _require(cfg, "epsilon")
        schedule = build_schedule(float(cfg["epsilon"]), d.n, d.k)
        m = min_count(d)
        derived["m"] = m
        derived["q_m"] = float(schedule.q[m])
        letters = [dsroo_sample(d, schedule, rng) for _ in range(trials)]
    else:
        _require(cfg, "epsilon")
        if cfg.get("scale") is not None:
            params = LaplaceParams(float(cfg["scale"]), float(cfg["epsilon"]))
        else:
            params = LaplaceParams.for_budget(float(cfg["epsilon"]), d.n)
        derived["scale"] = params.scale
        letters = [laplace_sample(d, params, rng) for _ in range(trials)]

    (out / "samples.csv").write_text(f"# k={d.k}\n" + "\n".join(str(v) for v in letters) + "\n")
    _write_manifest(out, "sample", cfg, derived)
    return EXIT_OK


def cmd_schedule(cfg: dict) -> int:
    _require(cfg, "epsilon", "n", "k")
    schedule = build_schedule(float(cfg["epsilon"]), int(cfg["n"]), int(cfg["k"]))
    out = _out_dir(cfg)
    save_schedule_csv(schedule.q, out / "schedule.csv")
    _write_manifest(out, "schedule", cfg, {"rows": len(schedule.q), "q0": float(schedule.q[0])})
    return EXIT_OK


def cmd_audit(cfg: dict) -> int:
    _require(cfg, "mech", "epsilon", "n", "k")
    mech, n, k = cfg["mech"], int(cfg["n"]), int(cfg["k"])
    epsilon = float(cfg["epsilon"])
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    tol = float(cfg["tol"]) if cfg.get("tol") is not None else 1e-9
    budget = PrivacyBudget(epsilon, tol)
    if mech == "roo":
        q = float(cfg["q"]) if cfg.get("q") is not None else roo_q_for_epsilon(epsilon, n, k)
        mechanism = RooConditional(q)
        derived = {"q": q}
    elif mech == "dsroo":
        schedule = build_schedule(epsilon, n, k)
        mechanism = DsRooConditional(schedule)
        derived = {"schedule_rows": len(schedule.q)}
    else:
        raise InputError("audit supports only the roo and dsroo mechanisms")

    try:
        report = audit_mechanism(mechanism, n, k, budget)
    except ValueError as exc:
        raise InputError(f"{exc}; rerun with smaller n or k")
    out = _out_dir(cfg)
    _write_json(out / "audit.json", report.to_json_dict())
    _write_manifest(out, "audit", cfg, derived)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} max_ratio={_fmt(report.max_ratio)} bound={_fmt(report.bound)} pairs={report.pairs_checked}")
    return EXIT_OK if report.passed else EXIT_AUDIT_FAIL


def _accuracy_rows(points: list[AccuracyPoint]) -> str:
    lines = ["epsilon,mechanism,tv,stderr,analytic_alpha,trials"]
    for pt in points:
        alpha = "" if pt.analytic_alpha is None else f"{pt.analytic_alpha:.17g}"
        lines.append(
            f"{pt.epsilon:.17g},{pt.mechanism},{pt.tv:.17g},{pt.tv_stderr:.17g},{alpha},{pt.trials}"
        )
    return "\n".join(lines) + "\n"


def cmd_accuracy(cfg: dict) -> int:
    _require(cfg, "dist", "n", "epsilon", "seed")
    try:
        p = load_distribution(cfg["dist"], k=int(cfg["k"]) if cfg.get("k") is not None else None)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc))
    epsilons = _epsilon_list(cfg["epsilon"])
    mechs = _mech_list(cfg["mech"]) if cfg.get("mech") is not None else list(MECHS)
    trials = int(cfg.get("trials") or 100_000)
    rng = RandomStream(int(cfg["seed"]))
    points = accuracy_sweep(p, int(cfg["n"]), epsilons, mechs, trials=trials, rng=rng)
    out = _out_dir(cfg)
    (out / "accuracy.csv").write_text(_accuracy_rows(points))
    _write_manifest(out, "accuracy", cfg, {"rows": len(points)})
    return EXIT_OK


def cmd_complexity(cfg: dict) -> int:
    _require(cfg, "k", "alpha", "epsilon")
    try:
        comp = complexity_comparison(int(cfg["k"]), float(cfg["alpha"]), float(cfg["epsilon"]))
    except ValueError as exc:
        raise InputError(str(exc))
    out = _out_dir(cfg)
    _write_json(
        out / "complexity.json",
        {
            "n_roo": comp.n_roo,
            "n_subrr": comp.n_subrr,
            "n_baseline": comp.n_baseline,
            "ordering_ok": comp.ordering_ok,
        },
    )
    _write_manifest(out, "complexity", cfg, {})
    print(f"{'mechanism':<12}{'n required':>14}")
    print(f"{'obscuring':<12}{_fmt(comp.n_roo):>14}")
    print(f"{'subset-rr':<12}{_fmt(comp.n_subrr):>14}")
    print(f"{'laplace':<12}{_fmt(comp.n_baseline):>14}")
    print(f"ordering_ok={comp.ordering_ok}")
    return EXIT_OK


def cmd_dist(cfg: dict) -> int:
    _require(cfg, "mech", "epsilon", "dist", "n")
    mech = cfg["mech"]
    if mech not in ("roo", "dsroo"):
        raise InputError("dist supports only the roo and dsroo mechanisms")
    try:
        p = load_distribution(cfg["dist"], k=int(cfg["k"]) if cfg.get("k") is not None else None)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc))
    n = int(cfg["n"])
    epsilon = float(cfg["epsilon"])
    if mech == "roo":
        mechanism = RooConditional(roo_q_for_epsilon(epsilon, n, p.k))
    else:
        mechanism = DsRooConditional(build_schedule(epsilon, n, p.k))

    method = cfg.get("method") or "auto"
    if method == "auto":
        method = "exact" if composition_count(n, p.k) <= DEFAULT_EXACT_CAP else "mc"
    if method == "exact":
        result = exact_marginal_output(p, n, mechanism)
        payload = {"k": p.k, "method": "exact", "probs": [float(x) for x in result.probs]}
    elif method == "mc":
        _require(cfg, "seed")
        trials = int(cfg.get("trials") or 100_000)
        rng = RandomStream(int(cfg["seed"]))
        result, stderr = mc_marginal_output(p, n, mechanism, trials, rng)
        payload = {
            "k": p.k,
            "method": "mc",
            "trials": trials,
            "probs": [float(x) for x in result.probs],
            "stderr": [float(x) for x in stderr],
        }
    else:
        raise InputError(f"unknown method {method!r}; expected exact, mc, or auto")
    out = _out_dir(cfg)
    _write_json(out / "dist.json", payload)
    _write_manifest(out, "dist", cfg, {"method": method})
    return EXIT_OK


_COMMANDS = {
    "sample": (cmd_sample, ["mech", "epsilon", "q", "scale", "input", "k", "seed", "trials", "out", "config"]),
    "schedule": (cmd_schedule, ["epsilon", "n", "k", "out", "config"]),
    "audit": (cmd_audit, ["mech", "epsilon", "q", "n", "k", "tol", "out", "config"]),
    "accuracy": (cmd_accuracy, ["mech", "epsilon", "dist", "n", "k", "seed", "trials", "out", "config"]),
    "complexity": (cmd_complexity, ["k", "alpha", "epsilon", "out", "config"]),
    "dist": (cmd_dist, ["mech", "epsilon", "dist", "n", "k", "seed", "trials", "method", "out", "config"]),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpsampler",
        description="Differentially private single-sample release for discrete distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    specs = {
        "mech": dict(help="mechanism tag (roo, dsroo, laplace); comma list for accuracy"),
        "epsilon": dict(help="privacy budget; comma list for accuracy sweeps"),
        "q": dict(type=float, help="explicit obscuring probability override (roo only)"),
        "scale": dict(type=float, help="explicit Laplace noise scale override"),
        "input": dict(help="dataset file (observations CSV or counts JSON)"),
        "dist": dict(help="distribution JSON file"),
        "n": dict(type=int, help="dataset size"),
        "k": dict(type=int, help="alphabet size"),
        "seed": dict(type=int, help="random seed (required when sampling)"),
        "trials": dict(type=int, help="number of releases or Monte Carlo trials"),
        "tol": dict(type=float, help="relative ratio tolerance for audits"),
        "alpha": dict(type=float, help="target accuracy for complexity comparisons"),
        "method": dict(help="marginal-law method: exact, mc, or auto"),
        "out": dict(help="output directory (default: current directory)"),
        "config": dict(help="JSON config file; explicit flags win"),
    }
    help_text = {
        "sample": "draw single-sample releases from a dataset",
        "schedule": "write the obscuring-probability schedule as CSV",
        "audit": "exhaustively audit the privacy guarantee",
        "accuracy": "sweep measured accuracy against privacy level",
        "complexity": "compare required dataset sizes across mechanisms",
        "dist": "compute the marginal output law exactly or by Monte Carlo",
    }
    for name, (_, keys) in _COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text[name])
        for key in keys:
            cmd.add_argument(f"--{key}", default=None, **specs[key])
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler, keys = _COMMANDS[args.command]
    try:
        cfg = _merge_config(args, [key for key in keys if key != "config"])
        return handler(cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
