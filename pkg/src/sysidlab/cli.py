"""Command-line front end.

Every run resolves its parameters from (in increasing precedence) built-in
defaults, an optional JSON config file, and explicit CLI flags, then writes
its artifacts plus a ``run-meta.json`` into the output directory. All
randomness flows from the single top-level seed (default ``DEFAULT_SEED``).

Exit codes: 0 success, 1 precondition/config errors, 2 internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, bounds, experiments, fisher, heatbench
from .errors import ConfigError, SysidError
from .estimators import align_realization, estimate_markov_ols, ho_kalman, moesp
from .lti import gen_inputs, load_model, make_dataset, minimal_realization, model_to_dict
from .seeding import child_seed

DEFAULT_SEED = 1729
DEFAULT_OUT = "out"

COMMANDS = ("simulate", "identify", "fim", "bounds", "sweep", "heatbench", "complexity")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map CLI misuse onto exit code 1
        raise ConfigError(message)


def _parse_int_list(value) -> list[int]:
    """Accept 4, [1, 2, 3], '1,2,3', and inclusive ranges like '2..12'."""
    try:
        if isinstance(value, (list, tuple)):
            return [int(v) for v in value]
        if isinstance(value, int):
            return [value]
        text = str(value).strip()
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(tok) for tok in text.split(",") if tok]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot parse integer list from {value!r}") from exc


def _parse_str_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [tok.strip() for tok in str(value).split(",") if tok.strip()]


def _as_int(params: dict, key: str) -> int:
    try:
        return int(params[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter {key!r} must be an integer, got {params[key]!r}") from exc


def _as_float(params: dict, key: str) -> float:
    try:
        return float(params[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter {key!r} must be a number, got {params[key]!r}") from exc


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file; CLI flags override its values")
    common.add_argument("--out", help=f"output directory (default {DEFAULT_OUT!r})")
    common.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--workers", type=int, help="parallelism cap for sweep/heatbench (default 1)")

    parser = _Parser(prog="sysidlab", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add_command(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    sp = add_command("simulate", "simulate N trajectories of a model")
    sp.add_argument("--model", help="model JSON file")
    sp.add_argument("--N", type=int, help="number of trajectories (default 1)")
    sp.add_argument("--K", type=int, help="trajectory length")
    sp.add_argument("--kind", help="input kind (default gaussian-unit)")

    sp = add_command("identify", "simulate data and fit a realization")
    sp.add_argument("--model", help="model JSON file")
    sp.add_argument("--algo", help="ho-kalman or moesp (default ho-kalman)")
    sp.add_argument("--n", type=int, help="model order (default: minimal order of the model)")
    sp.add_argument("--N", type=int, help="number of trajectories (default 100)")
    sp.add_argument("--K", type=int, help="trajectory length (default 18)")
    sp.add_argument("--kind", help="input kind (default gaussian-unit)")

    sp = add_command("fim", "pole information matrix of a diagonal model")
    sp.add_argument("--model", help="diagonal model JSON file")
    sp.add_argument("--N", type=int, help="number of input trajectories (default 1)")
    sp.add_argument("--K", type=int, help="trajectory length")
    sp.add_argument("--kind", help="input kind (default gaussian-energy-normalized)")

    sp = add_command("bounds", "evaluate the closed-form conditioning bounds")
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int, help="outputs (default 1)")
    sp.add_argument("--p", type=int, help="inputs (default 1)")
    sp.add_argument("--K1", type=int)
    sp.add_argument("--K2", type=int)
    sp.add_argument("--delta-bar", dest="delta_bar", type=float, help="entry-scale constant (default 1)")

    sp = add_command("sweep", "randomized bound-validity sweep")
    sp.add_argument("--which", help="hankel-sv, cond-O, or fim-min-eig")
    sp.add_argument("--n", help="dimensions, e.g. 2..12 or 2,4,8")
    sp.add_argument("--trials", type=int, help="trials per n (default 200)")
    sp.add_argument("--p", type=int, help="inputs (default 1)")
    sp.add_argument("--m", type=int, help="outputs (default 1)")

    sp = add_command("heatbench", "heat-conduction identification benchmark")
    sp.add_argument("--N", help="trajectory counts, e.g. 100,1000")
    sp.add_argument("--K", help="trajectory lengths, e.g. 18")
    sp.add_argument("--algo", help="comma list from {ho-kalman, moesp}")
    sp.add_argument("--alpha", type=float, help="thermal conductivity (default 0.2)")
    sp.add_argument("--noiseless", action="store_true", default=None,
                    help="zero both noise covariances (control run)")

    sp = add_command("complexity", "invert the variance floor into sample counts")
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=int, help="inputs (default 1)")
    sp.add_argument("--m", type=int, help="outputs (default 1)")
    sp.add_argument("--delta-bar", dest="delta_bar", type=float, help="entry-scale constant (default 1)")
    sp.add_argument("--epsilon", type=float, help="target accuracy (default 1)")
    sp.add_argument("--regime", help="many-short or one-long")
    sp.add_argument("--cap", type=int, help="search cap for one-long (default 10^6)")

    return parser


# defaults and the set of accepted config keys, per command
_DEFAULTS: dict[str, dict] = {
    "simulate": {"model": None, "N": 1, "K": 18, "kind": "gaussian-unit"},
    "identify": {"model": None, "algo": "ho-kalman", "n": None, "N": 100, "K": 18,
                 "kind": "gaussian-unit"},
    "fim": {"model": None, "N": 1, "K": 8, "kind": "gaussian-energy-normalized"},
    "bounds": {"n": 4, "m": 1, "p": 1, "K1": 4, "K2": 4, "delta_bar": 1.0},
    "sweep": {"which": "hankel-sv", "n": "2..12", "trials": 200, "p": 1, "m": 1},
    "heatbench": {"N": "100", "K": "18", "algo": "ho-kalman,moesp", "alpha": 0.2,
                  "noiseless": False},
    "complexity": {"n": 8, "p": 1, "m": 1, "delta_bar": 1.0, "epsilon": 1.0,
                   "regime": "many-short", "cap": fisher.DEFAULT_ONE_LONG_CAP},
}
_GLOBAL_KEYS = ("command", "seed", "out", "workers")


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data


def _resolve(args: argparse.Namespace, config: dict) -> tuple[str, dict, int, str, int]:
    command = args.command or config.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"no valid command given (choose from {', '.join(COMMANDS)})")

    allowed = set(_DEFAULTS[command]) | set(_GLOBAL_KEYS)
    unknown = sorted(set(config) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s) for {command!r}: {', '.join(unknown)}")

    params = dict(_DEFAULTS[command])
    for key in params:
        if key in config:
            params[key] = config[key]
    for key in params:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value

    seed = args.seed if args.seed is not None else config.get("seed", DEFAULT_SEED)
    out = args.out if args.out is not None else config.get("out", DEFAULT_OUT)
    workers = args.workers if args.workers is not None else config.get("workers", 1)
    try:
        return command, params, int(seed), str(out), int(workers)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed and workers must be integers: {exc}") from exc


def _require_model(params: dict, diagonal: bool = False):
    if not params.get("model"):
        raise ConfigError("this command needs --model <file.json>")
    path = params["model"]
    try:
        model = load_model(path)
    except OSError as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if diagonal and not model.diagonal_flag:
        raise ConfigError("this command needs a model with the diagonal flag set")
    return model


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _cmd_simulate(params, seed, out, workers):
    model = _require_model(params)
    ds = make_dataset(model, _as_int(params, "N"), _as_int(params, "K"),
                      kind=params["kind"], master_seed=seed)
    payload = {
        "master_seed": ds.master_seed,
        "N": ds.N,
        "K": ds.K,
        "model": model_to_dict(model),
        "trajectories": [
            {"seed": t.seed, "inputs": t.inputs.tolist(), "outputs": t.outputs.tolist()}
            for t in ds.trajectories
        ],
    }
    _json_dump(payload, out / "dataset.json")
    return ["dataset.json"]


def _cmd_identify(params, seed, out, workers):
    model = _require_model(params)
    ref = minimal_realization(model)
    n = _as_int(params, "n") if params["n"] is not None else ref.n
    K = _as_int(params, "K")
    ds = make_dataset(model, _as_int(params, "N"), K, kind=params["kind"], master_seed=seed)
    if params["algo"] == "ho-kalman":
        K1 = (K + 1) // 2
        est = ho_kalman(estimate_markov_ols(ds, K), n, K1, K + 1 - K1)
    elif params["algo"] == "moesp":
        K1 = int(np.ceil(n / ref.m)) + 2
        est = moesp(ds, n, K1, K - K1 + 1)
    else:
        raise ConfigError(f"unknown algo {params['algo']!r}")
    payload = {
        "method": est.method,
        "A_hat": est.A_hat.tolist(),
        "B_hat": est.B_hat.tolist(),
        "C_hat": est.C_hat.tolist(),
        "singular_values_used": est.singular_values_used.tolist(),
        "window": list(est.window),
        "warnings": est.warnings,
    }
    if n == ref.n:
        rep = align_realization(est, ref)
        payload["alignment"] = {
            "err_A": rep.err_A, "err_B": rep.err_B, "err_C": rep.err_C,
            "spectrum_distance": rep.spectrum_distance,
        }
    _json_dump(payload, out / "estimate.json")
    return ["estimate.json"]


def _cmd_fim(params, seed, out, workers):
    model = _require_model(params, diagonal=True)
    inputs = [gen_inputs(params["kind"], model.p, _as_int(params, "K"), seed=child_seed(seed, ell))
              for ell in range(_as_int(params, "N"))]
    rep = fisher.fim(model, inputs)
    payload = {
        "I": rep.I.tolist(),
        "lambda_min": rep.lambda_min,
        "lambda_min_bound": rep.lambda_min_bound,
        "sigma_min_V": rep.sigma_min_V,
        "sigma_min_V_bound": rep.sigma_min_V_bound,
    }
    _json_dump(payload, out / "fim.json")
    return ["fim.json"]


def _cmd_bounds(params, seed, out, workers):
    n, m, p = _as_int(params, "n"), _as_int(params, "m"), _as_int(params, "p")
    K1, K2 = _as_int(params, "K1"), _as_int(params, "K2")
    db = _as_float(params, "delta_bar")
    lb_O, lb_Q = bounds.cond_lower_bounds(n, m, p, K1, K2)
    payload = {
        "rho": bounds.rho(),
        "cond_lb_O": lb_O,
        "cond_lb_Q": lb_Q,
        "hankel_sigma_n_full": bounds.hankel_sigma_n_bound(n, m, p, K1, K2, db, "full-H"),
    }
    if K1 >= 2:
        payload["hankel_sigma_n_minus"] = bounds.hankel_sigma_n_bound(n, m, p, K1, K2, db, "H-minus")
    _json_dump(payload, out / "bounds.json")
    return ["bounds.json"]


def _cmd_sweep(params, seed, out, workers):
    cfg = experiments.SweepConfig(
        n_values=_parse_int_list(params["n"]),
        trials_per_n=_as_int(params, "trials"),
        p=_as_int(params, "p"), m=_as_int(params, "m"),
        seed=seed, which=params["which"],
    )
    rows = experiments.sweep(cfg, workers=workers)
    name = f"sweep-{cfg.which}.csv"
    experiments.write_sweep_csv(out / name, rows)
    return [name]


def _cmd_heatbench(params, seed, out, workers):
    scale = 0.0 if params["noiseless"] else 1.0
    cfg = heatbench.HeatConfig(alpha=_as_float(params, "alpha"),
                               process_scale=scale, meas_scale=scale)
    rows, pole_rows, meta = heatbench.run_heat_experiment(
        cfg,
        _parse_int_list(params["N"]),
        _parse_int_list(params["K"]),
        _parse_str_list(params["algo"]),
        seed=seed, workers=workers,
    )
    experiments.write_csv(out / "heatbench.csv", heatbench.HEAT_CSV_HEADER, rows)
    experiments.write_csv(out / "heatbench-poles.csv", heatbench.POLE_CSV_HEADER, pole_rows)
    _json_dump(meta, out / "heatbench-meta.json")
    return ["heatbench.csv", "heatbench-poles.csv", "heatbench-meta.json"]


def _cmd_complexity(params, seed, out, workers):
    n, p, m = _as_int(params, "n"), _as_int(params, "p"), _as_int(params, "m")
    db, eps = _as_float(params, "delta_bar"), _as_float(params, "epsilon")
    regime = params["regime"]
    exact = fisher.sample_complexity(n, p, m, db, eps, regime, k_cap=_as_int(params, "cap"))
    asym = fisher.sample_complexity_asymptotic(n, p, m, db, eps, regime)
    unit = "trajectories N" if regime == "many-short" else "trajectory length K"
    print(f"regime {regime}: exact inversion needs {unit} = {exact}")
    print(f"asymptotic-order expression evaluates to {asym:.6g}")
    payload = {"regime": regime, "n": n, "p": p, "m": m, "delta_bar": db,
               "epsilon": eps, "exact": exact, "asymptotic": asym}
    _json_dump(payload, out / "complexity.json")
    return ["complexity.json"]


_HANDLERS = {
    "simulate": _cmd_simulate,
    "identify": _cmd_identify,
    "fim": _cmd_fim,
    "bounds": _cmd_bounds,
    "sweep": _cmd_sweep,
    "heatbench": _cmd_heatbench,
    "complexity": _cmd_complexity,
}


def run(argv: list[str]) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    config = _load_config(args.config) if args.config else {}
    command, params, seed, out, workers = _resolve(args, config)

    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out!r} is not writable: {exc}") from exc

    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    artifacts = _HANDLERS[command](params, seed, out_dir, workers)
    meta = {
        "command": command,
        "config": params,
        "seed": seed,
        "workers": workers,
        "version": __version__,
        "started_at": started.isoformat(),
        "duration_ms": round((time.perf_counter() - t0) * 1000.0, 3),
        "artifacts": artifacts,
    }
    _json_dump(meta, out_dir / "run-meta.json")
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except SysidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
