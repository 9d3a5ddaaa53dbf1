"""Configuration-driven experiment runner.

Subcommands:

* ``solve <config.json>`` -- build the configured instance, run the selected
  schedule variant, write a CSV trace, print a one-line summary.
* ``batch <dir>``         -- run every ``*.json`` config in a directory.
* ``check``               -- run the invariant suites and print PASS/FAIL.

Exit codes: 0 success, 1 invalid config or schedule precondition,
2 numerical failure (divergence or I/O).
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import metrics, solver
from .errors import ConfigError, InvalidInputError, PreconditionError
from .instances import INSTANCE_NAMES, build_named
from .metrics import FIELD_ORDER, TraceRecord
from .schedules import ScheduleParams, Variant, make_schedule

_ALLOWED_KEYS = {
    "instance", "variant", "rho0", "gamma", "max_iters", "seed",
    "trace_path", "certificate",
}
_DEFAULTS = {"gamma": 0.5, "rho0": 1.0, "max_iters": 10000}


@dataclass(frozen=True)
class RunConfig:
    instance: str
    variant: Variant
    rho0: float = 1.0
    gamma: float = 0.5
    max_iters: int = 10000
    seed: Optional[int] = None
    trace_path: Optional[str] = None
    certificate: bool = False


def parse_config(text):
    """Parse and validate a JSON run configuration (strict keys)."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in raw:
        if key not in _ALLOWED_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for key in ("instance", "variant"):
        if key not in raw:
            raise ConfigError(f"missing required config key {key!r}")

    def expect(key, types, default=None, allow_bool=False):
        if key not in raw:
            return default
        val = raw[key]
        if isinstance(val, bool) is not allow_bool or not isinstance(val, types):
            raise ConfigError(f"config key {key!r} has the wrong type")
        return val

    instance = expect("instance", str)
    if instance not in INSTANCE_NAMES:
        raise ConfigError(f"unknown instance {instance!r}")
    try:
        variant = Variant.from_tag(expect("variant", str))
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    rho0 = float(expect("rho0", (int, float), _DEFAULTS["rho0"]))
    gamma = float(expect("gamma", (int, float), _DEFAULTS["gamma"]))
    max_iters = expect("max_iters", int, _DEFAULTS["max_iters"])
    seed = expect("seed", int)
    trace_path = expect("trace_path", str)
    certificate = expect("certificate", bool, False, allow_bool=True)
    if not isinstance(max_iters, int) or isinstance(max_iters, bool) or max_iters < 1:
        raise ConfigError("config key 'max_iters' must be a positive integer")
    if rho0 <= 0:
        raise ConfigError("config key 'rho0' must be positive")
    if not 0.0 < gamma < 1.0:
        raise ConfigError("config key 'gamma' must lie in (0, 1)")
    return RunConfig(instance, variant, rho0, gamma, max_iters, seed, trace_path, certificate)


def _format(value):
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trace(records, path):
    """Write trace rows as CSV with the fixed column order."""
    lines = [",".join(FIELD_ORDER)]
    for rec in records:
        lines.append(",".join(_format(getattr(rec, name)) for name in FIELD_ORDER))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _dual_metrics_available(prob):
    # the inner problem must be bounded below for any dual query
    return prob.H.conjugate_value is not None and (
        prob.strong_convexity > 0 or prob.fstar_lipschitz < math.inf
    )


def run_experiment(config, out=sys.stdout):
    """Execute one configured run; returns the process exit code."""
    prob = build_named(config.instance, config.seed)
    x0, y0 = prob.start
    params = ScheduleParams(
        variant=config.variant,
        rho0=config.rho0,
        gamma=config.gamma,
        cone_mode=prob.cone is not None,
        y0_norm=float(np.linalg.norm(y0)),
    )
    try:
        schedule = make_schedule(prob, params, x0, y0)
    except (PreconditionError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    result = solver.run(prob, params, x0, y0, config.max_iters)
    if result.status == "precondition_failed":
        print("error: schedule precondition failed", file=sys.stderr)
        return 1

    cert = None
    if config.certificate and prob.optimum is not None:
        cert = True
        for rec in result.trace:
            if rec.k < 1:
                continue
            try:
                rec.theorem_bound = metrics.theorem_bound(
                    prob, params, rec.k, x0, y0, schedule=schedule
                )
            except Exception:
                cert = None
                break
            if rec.primal_residual > rec.theorem_bound + 2 * prob.optimum.accuracy:
                cert = False

    final = result.trace[-1] if result.trace else None
    if final is not None and _dual_metrics_available(prob) and result.status == "completed":
        _, ry = solver.reported_points(result.final_state, config.variant)
        dv = metrics.dual_value(prob, ry)
        if prob.optimum is not None:
            final.dual_residual = dv.value + prob.optimum.value
        rx, _ = solver.reported_points(result.final_state, config.variant)
        final.pd_gap = metrics.pd_gap(prob, rx, ry)

    if config.trace_path:
        try:
            write_trace(result.trace, config.trace_path)
        except OSError as exc:
            print(f"error: cannot write trace: {exc}", file=sys.stderr)
            return 2

    slope = None
    if result.status == "completed" and config.max_iters >= 50:
        series = [(r.k, r.primal_residual) for r in result.trace if r.k >= 1]
        try:
            slope = metrics.fit_rate_slope(series, max(1, config.max_iters // 100), config.max_iters)
        except (InvalidInputError, ValueError):
            slope = None

    parts = [
        f"instance={config.instance}",
        f"variant={config.variant.value}",
        f"status={result.status}",
        f"iters={result.final_state.k}",
    ]
    if final is not None:
        parts.append(f"primal_residual={_format(final.primal_residual) or 'n/a'}")
        parts.append(f"dual_residual={_format(final.dual_residual) or 'n/a'}")
        if final.feasibility is not None:
            parts.append(f"feasibility={_format(final.feasibility)}")
    parts.append(f"slope={_format(slope) or 'n/a'}")
    if cert is not None:
        parts.append(f"certificate={'pass' if cert else 'fail'}")
    print(" ".join(parts), file=out)

    return 0 if result.status == "completed" else 2


# ---------------------------------------------------------------------------
# invariant suites for the `check` subcommand

def _check_moreau():
    from . import prox

    rng = np.random.default_rng(0)
    worst = 0.0
    prox_pairs = [
        # (prox of phi, direct prox of rho*phi^*)
        (lambda v, lam: v / (1.0 + lam), lambda v, rho: v / (1.0 + rho)),
        (prox.prox_max_coords, lambda v, rho: prox.project_simplex(v)),
        (lambda v, lam: prox.soft_threshold(v, lam), lambda v, rho: np.clip(v, -1.0, 1.0)),
    ]
    for _ in range(1000):
        n = int(rng.integers(1, 8))
        v = rng.standard_normal(n) * 3.0
        rho = float(rng.uniform(0.1, 10.0))
        for prox_phi, prox_conj in prox_pairs:
            direct = prox_conj(v, rho)
            composed = prox.prox_conjugate_moreau(prox_phi, v, rho)
            worst = max(worst, float(np.max(np.abs(direct - composed))))
    return worst <= 1e-10, f"max identity residual {worst:.2e}"


def _check_tau_sequence():
    from .instances import default_cone_qp
    from .schedules import momentum_safe_rho0

    qp = default_cone_qp()
    params = ScheduleParams(
        variant=Variant.SEMI_SCVX, rho0=momentum_safe_rho0(qp, cone_mode=True), cone_mode=True
    )
    sched = make_schedule(qp, params, *qp.start)
    worst = 0.0
    prev = sched.at(0)
    for k in range(1, 10001):
        cur = sched.at(k)
        worst = max(worst, abs(cur.tau**2 - (1.0 - cur.tau) * prev.tau**2))
        if not (1.0 / (k + 1) <= cur.tau * (1 + 1e-15) and cur.tau <= 2.0 / (k + 2) * (1 + 1e-15)):
            return False, f"tau bound violated at k={k}"
        prev = cur
    return worst <= 1e-14, f"max tau identity residual {worst:.2e}"


def _check_telescoping():
    from .instances import default_game

    game = default_game()
    x0, y0 = game.start
    ok = True
    worst = 0.0
    for variant in (Variant.SEMI_CVX,):
        params = ScheduleParams(variant=variant)
        sched = make_schedule(game, params, x0, y0)
        st = solver.init_state(game, x0, y0)
        for k in range(2000):
            ss = sched.at(k)
            solver.step(game, ss, st)
            resid = float(
                np.linalg.norm(st.y_tilde - ss.eta * st.theta - y0)
                / max(1.0, np.linalg.norm(y0))
            )
            worst = max(worst, resid)
    ok = worst <= 1e-8
    return ok, f"max telescoping residual {worst:.2e}"


def _check_diameter_bound():
    from .instances import default_game

    game = default_game()
    x0, y0 = game.start
    o = game.optimum
    params = ScheduleParams(variant=Variant.ERGODIC_CVX)
    sched = make_schedule(game, params, x0, y0)
    st = solver.init_state(game, x0, y0)
    margin = math.inf
    for k in range(5000):
        ss = sched.at(k)
        solver.step(game, ss, st)
        lhs = game.map_grad_lipschitz * (
            np.linalg.norm(o.y)
            + np.linalg.norm(st.y_tilde - o.y)
            + ss.rho * game.map_lipschitz * np.linalg.norm(st.x - o.x)
        )
        margin = min(margin, ss.rho * ss.constant_C - lhs)
    return margin >= -1e-9, f"min slack {margin:.3e}"


def _check_sandwich():
    from .instances import default_game

    rep = metrics.curvature_sandwich_check(default_game(), samples=1000, seed=1)
    return rep.passed, f"lower {rep.min_lower_slack:.2e}, upper {rep.max_upper_slack:.2e}"


def _check_op_counts():
    from .instances import default_game

    game = default_game()
    for variant, g_after_first in ((Variant.ERGODIC_CVX, 1), (Variant.SEMI_CVX, 2)):
        params = ScheduleParams(variant=variant)
        sched = make_schedule(game, params, *game.start)
        st = solver.init_state(game, *game.start)
        for k in range(50):
            solver.step(game, sched.at(k), st)
            expected_g = 2 if k == 0 else g_after_first
            counts = (
                st.ops.g_evals, st.ops.jvp_evals, st.ops.grad_f_evals,
                st.ops.prox_h_calls, st.ops.prox_Hstar_calls,
            )
            if counts != (expected_g, 1, 1, 1, 1):
                return False, f"{variant.value} k={k}: {counts}"
    return True, "per-iteration oracle calls match the contract"


def run_checks(out=sys.stdout):
    suites = [
        ("moreau-identity", _check_moreau),
        ("tau-sequence", _check_tau_sequence),
        ("dual-telescoping", _check_telescoping),
        ("diameter-bound", _check_diameter_bound),
        ("curvature-sandwich", _check_sandwich),
        ("op-counters", _check_op_counts),
    ]
    all_ok = True
    for name, fn in suites:
        ok, detail = fn()
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=out)
    return 0 if all_ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(prog="pdcomp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_solve = sub.add_parser("solve", help="run one JSON config")
    p_solve.add_argument("config", type=Path)
    p_batch = sub.add_parser("batch", help="run every *.json config in a directory")
    p_batch.add_argument("directory", type=Path)
    sub.add_parser("check", help="run the invariant suites")
    args = parser.parse_args(argv)

    if args.command == "check":
        return run_checks()

    if args.command == "solve":
        paths = [args.config]
    else:
        paths = sorted(args.directory.glob("*.json"))
        if not paths:
            print(f"error: no *.json configs in {args.directory}", file=sys.stderr)
            return 1

    worst = 0
    for path in paths:
        try:
            config = parse_config(path.read_text(encoding="utf-8"))
        except (ConfigError, OSError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            worst = max(worst, 1)
            continue
        worst = max(worst, run_experiment(config))
    return worst


if __name__ == "__main__":
    sys.exit(main())
