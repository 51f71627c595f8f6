"""Command-line front end.

Subcommands mirror the library's pipelines: exact classical bounds, the
Hamiltonian-to-inequality search, the inequality-to-settings search over
noisy data, the alternating bounce loop, and lattice-scale bounds. A config
file may hold one JSON object per subcommand; explicit flags override it.

Exit status: 0 on success, 2 on validation errors, 3 on numerical failures.
All floating-point output goes through one fixed 12-digit format so repeated
runs with the same seed produce byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bell import (
    BellCoeffs,
    Scenario,
    bell_value,
    classical_bound,
    gisin_bound_closed_form,
    gisin_variant,
)
from .lattice import (
    HoneycombParams,
    LatticeSpec,
    bundled_lattice_path,
    honeycomb_coupling,
    improved_bound_scaling,
    lattice_classical_bound,
    lattice_quantum_floor,
    load_lattice,
)
from .mapping import (
    RANK_RCOND,
    RESIDUAL_RTOL,
    LinearSolveError,
    MeasurementSettings,
    bell_operator,
    build_transfer_matrix,
    quantum_value_from_data,
    residual_norm,
)
from .noise import (
    NoiseModel,
    PLACEMENT_AFTER_EACH_GATE,
    PLACEMENTS,
    prepare_noisy_singlet,
)
from .optimize import (
    FiniteDiffConfig,
    NoFeasiblePointError,
    OptimizerConfig,
    bound_maximization_task,
    bounce_loop,
    minimize_quantum_value,
    restart_harness,
    value_minimization_task,
)
from .pauli import JACOBI_SWEEP_TOL, JacobiConvergenceError, correlator_vector
from .presets import OPERATOR_PRESETS, operator_preset, tetrahedron_axes_settings
from .serialize import format_float, write_csv, write_json, write_json_lines

__all__ = ["main"]

_DEFAULTS = {
    "classical-bound": {
        "gisin_delta": None,
        "alpha": None,
        "alpha_file": None,
        "m1": None,
        "m2": None,
        "seed": 0,
        "out": None,
    },
    "ham2ineq": {
        "preset": None,
        "h": None,
        "m1": 3,
        "m2": 3,
        "restarts": 32,
        "steps": 10_000,
        "lr": None,
        "fd_step": 1e-4,
        "solve_mode": None,
        "seed": 0,
        "out": ".",
    },
    "ineq2ham": {
        "gisin_delta": None,
        "alpha_file": None,
        "p_grid": "0:0.014:0.001",
        "data_file": None,
        "noise_placement": PLACEMENT_AFTER_EACH_GATE,
        "restarts": 4,
        "steps": 2_000,
        "lr": None,
        "fd_step": 1e-4,
        "seed": 0,
        "out": ".",
    },
    "bounce": {
        "gisin_delta": None,
        "alpha_file": None,
        "preset": None,
        "h": None,
        "p": 0.010,
        "data_file": None,
        "noise_placement": PLACEMENT_AFTER_EACH_GATE,
        "max_loops": 10,
        "gap_tol": 1e-6,
        "steps": 10_000,
        "lr": None,
        "fd_step": 1e-4,
        "solve_mode": None,
        "seed": 0,
        "out": ".",
    },
    "lattice": {
        "file": None,
        "epsilon": None,
        "gisin_delta": 2.0,
        "alpha_file": None,
        "improved_bound": None,
        "seed": 0,
        "out": None,
    },
}


def _provenance(cfg: dict) -> dict:
    return {
        "version": __version__,
        "seed": cfg.get("seed"),
        "noise_placement": cfg.get("noise_placement"),
        "residual_rtol": RESIDUAL_RTOL,
        "rank_rcond": RANK_RCOND,
        "jacobi_sweep_tol": JACOBI_SWEEP_TOL,
        "fd_step": cfg.get("fd_step"),
    }


def _parse_numbers(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.replace(",", " ").split()])


def _load_alpha_file(path) -> BellCoeffs:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return BellCoeffs.from_matrix(np.asarray(data, dtype=float))


def _load_correlator_file(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    c = np.asarray(data, dtype=float)
    if c.shape != (9,):
        raise ValueError(f"correlator data file must hold 9 numbers, got shape {c.shape}")
    return c


def _resolve_alpha(cfg: dict, *, default_delta: float | None = None) -> BellCoeffs:
    given = [k for k in ("gisin_delta", "alpha", "alpha_file") if cfg.get(k) is not None]
    if len(given) > 1:
        raise ValueError(f"choose one coefficient source, got {given}")
    if cfg.get("gisin_delta") is not None:
        return gisin_variant(float(cfg["gisin_delta"]))
    if cfg.get("alpha") is not None:
        flat = _parse_numbers(cfg["alpha"])
        m1, m2 = cfg.get("m1"), cfg.get("m2")
        if m1 is None or m2 is None:
            raise ValueError("inline alpha needs --m1 and --m2")
        if flat.size != m1 * m2:
            raise ValueError(f"alpha has {flat.size} entries, expected {m1 * m2}")
        return BellCoeffs(Scenario(int(m1), int(m2)), flat.reshape(int(m1), int(m2)))
    if cfg.get("alpha_file") is not None:
        return _load_alpha_file(cfg["alpha_file"])
    if default_delta is not None:
        return gisin_variant(default_delta)
    raise ValueError("no coefficients given: use --gisin-delta, --alpha, or --alpha-file")


def _resolve_h(cfg: dict) -> np.ndarray:
    if cfg.get("preset") is not None and cfg.get("h") is not None:
        raise ValueError("choose either --preset or --h, not both")
    if cfg.get("preset") is not None:
        return operator_preset(cfg["preset"])
    if cfg.get("h") is not None:
        h = _parse_numbers(cfg["h"])
        if h.shape != (9,):
            raise ValueError(f"h must have 9 entries, got {h.size}")
        return h
    raise ValueError("no operator given: use --preset or --h")


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_kv(key: str, value):
    if isinstance(value, float):
        value = format_float(value)
    print(f"{key}: {value}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_classical_bound(cfg: dict):
    bc = _resolve_alpha(cfg)
    beta, witness = classical_bound(bc)
    _print_kv("classical bound", beta)
    _print_kv("witness a", witness.a.tolist())
    _print_kv("witness b", witness.b.tolist())
    summary = {
        "command": "classical-bound",
        "provenance": _provenance(cfg),
        "beta_c": beta,
        "witness_a": witness.a.tolist(),
        "witness_b": witness.b.tolist(),
    }
    if cfg.get("gisin_delta") is not None:
        closed = gisin_bound_closed_form(float(cfg["gisin_delta"]))
        _print_kv("closed form", closed)
        _print_kv("difference", beta - closed)
        summary["closed_form"] = closed
        summary["difference"] = beta - closed
    if cfg.get("out") is not None:
        write_json(_out_dir(cfg) / "classical_bound_summary.json", summary)


def _cmd_ham2ineq(cfg: dict):
    h = _resolve_h(cfg)
    scenario = Scenario(int(cfg["m1"]), int(cfg["m2"]))
    opt_cfg = OptimizerConfig(
        learning_rate=cfg["lr"] if cfg.get("lr") is not None else 0.02,
        max_steps=int(cfg["steps"]),
    )
    fd_cfg = FiniteDiffConfig(step=float(cfg["fd_step"]))
    task = bound_maximization_task(
        h, scenario, cfg=opt_cfg, fd_cfg=fd_cfg, solve_mode=cfg.get("solve_mode")
    )
    outcome = restart_harness(task, int(cfg["restarts"]), int(cfg["seed"]))
    best = outcome.best
    t_best = build_transfer_matrix(best.settings)
    resid = residual_norm(t_best, best.alpha.alpha.ravel(), h)
    _print_kv("best classical bound", best.value)
    _print_kv("winning restart", outcome.best_index)
    out = _out_dir(cfg)
    curve = [(step, v) for step, v in enumerate(best.history) if np.isfinite(v)]
    write_csv(out / "ham2ineq_curve.csv", ("step", "value"), curve)
    write_json(
        out / "ham2ineq_summary.json",
        {
            "command": "ham2ineq",
            "provenance": _provenance(cfg),
            "h": h.tolist(),
            "scenario": [scenario.m1, scenario.m2],
            "restarts": int(cfg["restarts"]),
            "steps": int(cfg["steps"]),
            "best_beta_c": best.value,
            "winning_restart": outcome.best_index,
            "settings": best.settings.to_vector().tolist(),
            "alpha": best.alpha.alpha.tolist(),
            "residual": resid,
        },
    )


def _parse_p_grid(text: str) -> np.ndarray:
    parts = [float(tok) for tok in str(text).split(":")]
    if len(parts) != 3:
        raise ValueError(f"p grid must be start:stop:step, got {text!r}")
    start, stop, step = parts
    if step <= 0 or stop < start:
        raise ValueError(f"bad p grid {text!r}")
    n = int(round((stop - start) / step))
    return start + step * np.arange(n + 1)


def _cmd_ineq2ham(cfg: dict):
    bc = _resolve_alpha(cfg, default_delta=2.0)
    if (bc.scenario.m1, bc.scenario.m2) != (4, 3):
        raise ValueError("settings optimization is wired for (4, 3) coefficient matrices")
    ms0 = tetrahedron_axes_settings()
    t0 = build_transfer_matrix(ms0)
    beta_c = classical_bound(bc)[0]
    opt_cfg = OptimizerConfig(
        learning_rate=cfg["lr"] if cfg.get("lr") is not None else 0.01,
        max_steps=int(cfg["steps"]),
    )
    fd_cfg = FiniteDiffConfig(step=float(cfg["fd_step"]))
    placement = cfg["noise_placement"]
    if placement not in PLACEMENTS:
        raise ValueError(f"unknown noise placement {placement!r}")
    if cfg.get("data_file") is not None:
        sources = [(None, _load_correlator_file(cfg["data_file"]))]
    else:
        grid = _parse_p_grid(cfg["p_grid"])
        sources = [
            (float(p), correlator_vector(prepare_noisy_singlet(NoiseModel(float(p), placement))))
            for p in grid
        ]
    rows = []
    n_restarts = int(cfg["restarts"])
    seed = int(cfg["seed"])
    for p, c in sources:
        original = quantum_value_from_data(c, t0, bc)
        best = minimize_quantum_value(bc, c, ms0, cfg=opt_cfg, fd_cfg=fd_cfg).value
        if n_restarts > 0:
            task = value_minimization_task(bc, c, cfg=opt_cfg, fd_cfg=fd_cfg)
            best = min(best, restart_harness(task, n_restarts, seed).best.value)
        rows.append((p, original, best, beta_c))
        label = "data" if p is None else f"p={format_float(p)}"
        print(
            f"{label} original {format_float(original)} "
            f"optimized {format_float(best)} beta_c {format_float(beta_c)}"
        )
    out = _out_dir(cfg)
    write_csv(out / "ineq2ham_rows.csv", ("p", "original", "optimized", "beta_c"), rows)
    write_json(
        out / "ineq2ham_summary.json",
        {
            "command": "ineq2ham",
            "provenance": _provenance(cfg),
            "alpha": bc.alpha.tolist(),
            "beta_c": beta_c,
            "restarts": n_restarts,
            "steps": int(cfg["steps"]),
            "rows": [list(r) for r in rows],
        },
    )


def _cmd_bounce(cfg: dict):
    ineq_given = any(cfg.get(k) is not None for k in ("gisin_delta", "alpha", "alpha_file"))
    op_given = any(cfg.get(k) is not None for k in ("preset", "h"))
    if ineq_given and op_given:
        raise ValueError("start from an inequality or an operator, not both")
    start = _resolve_h(cfg) if op_given else _resolve_alpha(cfg, default_delta=2.0)
    ms0 = tetrahedron_axes_settings()
    placement = cfg["noise_placement"]
    if placement not in PLACEMENTS:
        raise ValueError(f"unknown noise placement {placement!r}")
    if cfg.get("data_file") is not None:
        c = _load_correlator_file(cfg["data_file"])
    else:
        c = correlator_vector(prepare_noisy_singlet(NoiseModel(float(cfg["p"]), placement)))
    steps = int(cfg["steps"])
    lr = cfg.get("lr")
    min_cfg = OptimizerConfig(learning_rate=lr if lr is not None else 0.01, max_steps=steps)
    max_cfg = OptimizerConfig(learning_rate=lr if lr is not None else 0.02, max_steps=steps)
    result = bounce_loop(
        start,
        ms0,
        c,
        min_cfg=min_cfg,
        max_cfg=max_cfg,
        fd_cfg=FiniteDiffConfig(step=float(cfg["fd_step"])),
        solve_mode=cfg.get("solve_mode"),
        gap_tol=float(cfg["gap_tol"]),
        max_loops=int(cfg["max_loops"]),
    )
    _print_kv("loops", result.loops)
    _print_kv("converged", result.converged)
    _print_kv("violation", result.violation)
    _print_kv("final gap", result.final_gap)
    out = _out_dir(cfg)
    write_json_lines(
        out / "bounce_trajectory.jsonl",
        (
            {
                "half_step": r.half_step,
                "kind": r.kind,
                "beta_c": r.beta_c,
                "beta_q": r.beta_q,
                "gap": r.gap,
            }
            for r in result.records
        ),
    )
    write_json(
        out / "bounce_summary.json",
        {
            "command": "bounce",
            "provenance": _provenance(cfg),
            "loops": result.loops,
            "converged": result.converged,
            "violation": result.violation,
            "final_gap": result.final_gap,
            "final_beta_c": result.records[-1].beta_c,
            "final_beta_q": result.records[-1].beta_q,
            "alpha": result.alpha.alpha.tolist(),
            "settings": result.settings.to_vector().tolist(),
        },
    )


def _certificate_digest(certificate: dict) -> str:
    canon = json.dumps([[v, certificate[v].tolist()] for v in sorted(certificate)])
    return hashlib.sha256(canon.encode()).hexdigest()


def _cmd_lattice(cfg: dict):
    path = cfg["file"] if cfg.get("file") is not None else bundled_lattice_path()
    ls = load_lattice(path)
    if cfg.get("epsilon") is not None:
        params = HoneycombParams(float(cfg["epsilon"]))
        ls = LatticeSpec(
            ls.vertices,
            tuple(
                (u, v, j if color == "other" else honeycomb_coupling(params, color), color)
                for u, v, j, color in ls.edges
            ),
        )
    local = _resolve_alpha(cfg)
    if (local.scenario.m1, local.scenario.m2) != (4, 3):
        raise ValueError("lattice quantum floor is wired for (4, 3) local coefficients")
    local_op = bell_operator(tetrahedron_axes_settings(), local)
    beta_local = classical_bound(local)[0]
    beta, certificate = lattice_classical_bound(ls, local)
    floor = lattice_quantum_floor(ls, local_op)
    digest = _certificate_digest(certificate)
    _print_kv("total coupling", ls.total_coupling())
    _print_kv("classical bound", beta)
    _print_kv("certificate sha256", digest)
    _print_kv("quantum floor", floor)
    improved = []
    for new_local in cfg.get("improved_bound") or []:
        scaled = improved_bound_scaling(beta, beta_local, float(new_local))
        improved.append((float(new_local), scaled))
        _print_kv(f"improved bound (local {format_float(float(new_local))})", scaled)
    if cfg.get("out") is not None:
        write_json(
            _out_dir(cfg) / "lattice_summary.json",
            {
                "command": "lattice",
                "provenance": _provenance(cfg),
                "vertices": ls.vertices,
                "edge_count": len(ls.edges),
                "total_coupling": ls.total_coupling(),
                "beta_local": beta_local,
                "beta_lattice": beta,
                "certificate_sha256": digest,
                "quantum_floor": floor,
                "improved_bounds": [list(pair) for pair in improved],
            },
        )


_HANDLERS = {
    "classical-bound": _cmd_classical_bound,
    "ham2ineq": _cmd_ham2ineq,
    "ineq2ham": _cmd_ineq2ham,
    "bounce": _cmd_bounce,
    "lattice": _cmd_lattice,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="JSON config file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--restarts", type=int, default=None)
    common.add_argument("--steps", type=int, default=None)
    common.add_argument("--lr", type=float, default=None)
    common.add_argument("--fd-step", type=float, default=None)
    common.add_argument("--noise-placement", type=str, default=None, choices=PLACEMENTS)

    parser = argparse.ArgumentParser(
        prog="bellbounce",
        description="Bell inequality / Bell operator optimization toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical-bound", parents=[common], help="exact deterministic bound")
    p.add_argument("--gisin-delta", type=float, default=None)
    p.add_argument("--alpha", type=str, default=None, help="inline coefficients")
    p.add_argument("--alpha-file", type=str, default=None, help="JSON coefficient matrix")
    p.add_argument("--m1", type=int, default=None)
    p.add_argument("--m2", type=int, default=None)

    p = sub.add_parser("ham2ineq", parents=[common], help="operator to maximal-bound inequality")
    p.add_argument("--preset", type=str, default=None, choices=OPERATOR_PRESETS)
    p.add_argument("--h", type=str, default=None, help="9 inline Pauli coefficients")
    p.add_argument("--m1", type=int, default=None)
    p.add_argument("--m2", type=int, default=None)
    p.add_argument("--solve-mode", type=str, default=None, choices=("unique", "min_norm"))

    p = sub.add_parser("ineq2ham", parents=[common], help="inequality to minimal quantum value")
    p.add_argument("--gisin-delta", type=float, default=None)
    p.add_argument("--alpha-file", type=str, default=None)
    p.add_argument("--p-grid", type=str, default=None, help="start:stop:step")
    p.add_argument("--data-file", type=str, default=None, help="JSON file of 9 correlators")

    p = sub.add_parser("bounce", parents=[common], help="alternate the two optimizations")
    p.add_argument("--gisin-delta", type=float, default=None)
    p.add_argument("--alpha-file", type=str, default=None)
    p.add_argument("--preset", type=str, default=None, choices=OPERATOR_PRESETS)
    p.add_argument("--h", type=str, default=None)
    p.add_argument("--p", type=float, default=None, help="depolarizing strength")
    p.add_argument("--data-file", type=str, default=None)
    p.add_argument("--max-loops", type=int, default=None)
    p.add_argument("--gap-tol", type=float, default=None)
    p.add_argument("--solve-mode", type=str, default=None, choices=("unique", "min_norm"))

    p = sub.add_parser("lattice", parents=[common], help="lattice-scale bounds")
    p.add_argument("--file", type=str, default=None, help="lattice file (default: bundled)")
    p.add_argument("--epsilon", type=float, default=None, help="recouple colored edges")
    p.add_argument("--gisin-delta", type=float, default=None)
    p.add_argument("--alpha-file", type=str, default=None)
    p.add_argument("--improved-bound", type=float, nargs="*", default=None)

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    defaults = _DEFAULTS[args.command]
    cfg = dict(defaults)
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object keyed by subcommand")
        section = data.get(args.command, {})
        if not isinstance(section, dict):
            raise ValueError(f"config section {args.command!r} must be an object")
        unknown = sorted(set(section) - set(defaults))
        if unknown:
            raise ValueError(f"unknown config keys for {args.command}: {unknown}")
        cfg.update(section)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        _HANDLERS[args.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LinearSolveError, JacobiConvergenceError, NoFeasiblePointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0
