"""Revealment inequality checkers applied to measured run statistics.

Monte-Carlo revealments enter each inequality on the side that makes the
bound harder to violate by noise (upper confidence where the revealment
multiplies the bound), so a reported violation localises a real bug and
never a statistical fluke.  The jump size is reported as ``epsilon_jump``
to keep it clearly apart from the ``l2_error`` of truncated algorithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .boolean_fn import InputError

SLACK_TOL = 1e-12
CONFIDENCE_SIGMAS = 3.0


def _upper(mean, stderr):
    return mean + CONFIDENCE_SIGMAS * stderr


def certificate_verify(f, final):
    """True when the +-1 coordinates of ``final`` force the value of f."""
    return f.determined(final) is not None


def measure_l2_error(f, stats, samples_per_run=16):
    """Estimated squared error of stopping early, via completion sampling.

    For each stored final position, completions are drawn with coordinate
    means given by the position; the squared gap between the function on
    the completion and the harmonic value at the position is an unbiased
    estimate of the conditional squared error.  Returns (mean, stderr)
    over runs of the per-run estimates.
    """
    if stats.finals is None:
        raise InputError("stats were built without stored final positions")
    table = f.dense_table()
    finals = stats.finals
    runs, n = finals.shape
    p_up = (1.0 + finals) / 2.0
    weights = 1 << np.arange(n)
    per_run = np.zeros(runs)
    for r in range(runs):
        if stats.statuses is not None and stats.statuses[r] != 0:
            continue  # run stopped determined: zero error by construction
        gen = rng.stream(stats.seed, r, rng.STREAM_COMPLETION)
        u = gen.random((samples_per_run, n))
        bits = (u < p_up[r]).astype(np.int64)
        vals = table[bits.dot(weights)]
        hval = f.harmonic(finals[r])
        per_run[r] = float(np.mean((vals - hval) ** 2))
    stderr = (float(np.std(per_run, ddof=1) / math.sqrt(runs))
              if runs > 1 else 0.0)
    return float(np.mean(per_run)), stderr


def _delta_upper(stats):
    return np.asarray(stats.delta) + CONFIDENCE_SIGMAS * np.asarray(
        stats.delta_stderr)


def ss_check(f, stats, l2_error=0.0, l2_stderr=0.0):
    """Per-level Fourier weight against the revealment bound.

    With zero error the bound is weight <= delta * k * ||f||^2; with a
    truncated algorithm the general form uses the measured magnitude of
    the stopped value and the measured l2 error.
    """
    ft = f.fourier()
    zero_error = stats.truncated_runs == 0 and l2_error == 0.0
    delta_up = float(_delta_upper(stats).max())
    if zero_error:
        mag_sq_up = ft.norm_sq()
        l2_up = 0.0
    else:
        if stats.finals is None:
            raise InputError("general-form check needs stored finals")
        hvals = np.array([f.harmonic(p) ** 2 for p in stats.finals])
        mag_sq_up = _upper(float(hvals.mean()),
                           float(np.std(hvals, ddof=1) / math.sqrt(len(hvals)))
                           if len(hvals) > 1 else 0.0)
        l2_up = math.sqrt(max(0.0, _upper(l2_error, l2_stderr)))
    levels = []
    for k in range(1, f.n + 1):
        weight = ft.level_weight(k)
        bound = (math.sqrt(max(0.0, mag_sq_up)) * math.sqrt(k * delta_up)
                 + l2_up) ** 2
        levels.append({
            "k": k,
            "weight": weight,
            "bound": bound,
            "slack": bound - weight,
            "ok": weight <= bound + SLACK_TOL,
        })
    return levels


def osss_check(f, stats):
    """Variance against degree times revealment-weighted derivative norms."""
    if stats.truncated_runs:
        raise InputError("the variance bound applies to 0-error runs only")
    ft = f.fourier()
    d = ft.degree()
    delta_up = _delta_upper(stats)
    masks = np.arange(1 << f.n)
    rhs = 0.0
    for i in range(f.n):
        din_sq = float(np.sum(ft.coef[(masks >> i) & 1 == 1] ** 2))
        rhs += float(delta_up[i]) * din_sq
    rhs *= d
    variance = ft.variance()
    return {
        "variance": variance,
        "rhs": rhs,
        "slack": rhs - variance,
        "ok": variance <= rhs + SLACK_TOL,
    }


def bsw_check(f, stats):
    """Largest revealment against the square-root variance floor."""
    if stats.truncated_runs:
        raise InputError("the revealment floor applies to 0-error runs only")
    variance = f.fourier().variance()
    floor = math.sqrt(variance / (2.0 * f.n))
    delta_up = float(_delta_upper(stats).max())
    delta_low = float(np.max(np.asarray(stats.delta)
                             - CONFIDENCE_SIGMAS * np.asarray(stats.delta_stderr)))
    return {
        "floor": floor,
        "delta_max_upper": delta_up,
        "delta_max_lower": delta_low,
        "slack": delta_up - floor,
        "ok": delta_up + SLACK_TOL >= floor,
    }


@dataclass
class BoundReport:
    fn_id: str
    strategy_id: str
    epsilon_jump: float
    l2_error: float
    delta: list
    delta_stderr: list
    per_level: list
    osss: dict | None
    bsw: dict | None
    verdict: bool = field(init=False)

    def __post_init__(self):
        checks = [lvl["ok"] for lvl in self.per_level]
        if self.osss is not None:
            checks.append(self.osss["ok"])
        if self.bsw is not None:
            checks.append(self.bsw["ok"])
        self.verdict = all(checks)

    def to_dict(self):
        return {
            "function": self.fn_id,
            "strategy": self.strategy_id,
            "epsilon_jump": self.epsilon_jump,
            "l2_error": self.l2_error,
            "delta": self.delta,
            "delta_stderr": self.delta_stderr,
            "per_level": self.per_level,
            "osss": self.osss,
            "bsw": self.bsw,
            "verdict": self.verdict,
        }

    def render(self):
        lines = [
            f"function={self.fn_id} strategy={self.strategy_id} "
            f"epsilon_jump={self.epsilon_jump} l2_error={self.l2_error:.6g}",
            f"{'k':>3} {'weight':>12} {'bound':>12} {'slack':>12} ok",
        ]
        for lvl in self.per_level:
            lines.append(
                f"{lvl['k']:>3} {lvl['weight']:>12.6f} {lvl['bound']:>12.6f} "
                f"{lvl['slack']:>12.6f} {'yes' if lvl['ok'] else 'NO'}")
        if self.osss is not None:
            o = self.osss
            lines.append(
                f"variance bound: Var={o['variance']:.6f} <= {o['rhs']:.6f} "
                f"({'yes' if o['ok'] else 'NO'})")
        if self.bsw is not None:
            b = self.bsw
            lines.append(
                f"revealment floor: delta_max={b['delta_max_upper']:.6f} >= "
                f"{b['floor']:.6f} ({'yes' if b['ok'] else 'NO'})")
        lines.append(f"verdict: {'PASS' if self.verdict else 'FAIL'}")
        return "\n".join(lines)


def bound_report(f, stats, samples_per_run=16):
    """Run every applicable inequality check against one batch of stats."""
    truncated = stats.truncated_runs > 0
    if truncated:
        l2_mean, l2_stderr = measure_l2_error(f, stats, samples_per_run)
        per_level = ss_check(f, stats, l2_mean, l2_stderr)
        osss = None
        bsw = None
        l2 = l2_mean
    else:
        per_level = ss_check(f, stats)
        osss = osss_check(f, stats)
        bsw = bsw_check(f, stats)
        l2 = 0.0
    return BoundReport(
        fn_id=stats.fn_id,
        strategy_id=stats.strategy_id,
        epsilon_jump=stats.epsilon,
        l2_error=l2,
        delta=[float(d) for d in stats.delta],
        delta_stderr=[float(d) for d in stats.delta_stderr],
        per_level=per_level,
        osss=osss,
        bsw=bsw,
    )
