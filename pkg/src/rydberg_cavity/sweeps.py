"""Detuning sweeps, reference-detuning search and CSV output."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import dynamics
from .models import Variant, build_h3, build_model
from .params import PhysicalParams, derive_effective

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepSpec:
    theta_min: float = -8.0
    theta_max: float = 4.0
    theta_step: float = 0.05
    variants: tuple[Variant, ...] = (Variant.SPIN,)
    out_dir: Path = Path("out")
    workers: int = 1
    cutoff: int = 6

    def __post_init__(self):
        if not self.theta_step > 0:
            raise ValueError("theta_step must be positive")
        if not self.theta_min < self.theta_max:
            raise ValueError("theta_min must be below theta_max")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def thetas(self) -> np.ndarray:
        n = int(math.floor((self.theta_max - self.theta_min) / self.theta_step + 1e-9)) + 1
        return self.theta_min + self.theta_step * np.arange(n)


def photon_number(p: PhysicalParams, variant: Variant = Variant.SPIN, cutoff: int = 6) -> float:
    m = build_model(variant, p, cutoff)
    rho = dynamics.steady_state(dynamics.build_liouvillian(m))
    return dynamics.photon_moments(m, rho)[0]


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-3) -> float:
    """Maximiser of a unimodal ``f`` on [lo, hi] to absolute tolerance ``xtol``."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def find_reference_detuning(p: PhysicalParams, window: tuple[float, float] = (-15.0, 5.0),
                            variant: Variant = Variant.SPIN, cutoff: int = 6,
                            coarse_step: float = 0.25, xtol: float = 1e-3) -> float:
    """Cavity detuning of maximal steady-state photon number.

    A coarse scan picks the highest grid point, then golden-section search
    refines within one grid step on either side.
    """
    variant = Variant(variant)
    lo, hi = window
    grid = np.linspace(lo, hi, int(round((hi - lo) / coarse_step)) + 1)

    def n_of(delta_c: float) -> float:
        return photon_number(p.replace(delta_c=float(delta_c)), variant, cutoff)

    values = np.array([n_of(x) for x in grid])
    k = int(np.argmax(values))
    if k == 0 or k == grid.size - 1:
        raise ValueError(f"photon-number maximum lies on the window boundary ({grid[k]:g})")
    return float(golden_section_max(n_of, grid[k - 1], grid[k + 1], xtol))


G2ZERO_COLUMNS = ("theta", "delta_c", "n_ss", "pairs_ss", "g2_numeric", "g2_perturbative", "residual", "error")


def evaluate_point(p: PhysicalParams, variant: Variant, cutoff: int, theta: float, delta_c0: float) -> dict:
    """One sweep row; failures are reported in the ``error`` column."""
    delta_c = delta_c0 + theta
    row = dict.fromkeys(G2ZERO_COLUMNS, math.nan)
    row.update(theta=theta, delta_c=delta_c, error="")
    try:
        m = build_model(variant, p.replace(delta_c=delta_c), cutoff)
        L = dynamics.build_liouvillian(m)
        rho = dynamics.steady_state(L)
        n, pairs = dynamics.photon_moments(m, rho)
        row.update(
            n_ss=n,
            pairs_ss=pairs,
            residual=float(np.abs(L @ dynamics.vec(rho)).max()),
            g2_numeric=dynamics.g2_zero(m, rho),
            g2_perturbative=dynamics.g2_zero_perturbative(m),
        )
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _evaluate(args):
    return evaluate_point(*args)


def parallel_map(fn, items: Sequence, workers: int = 1) -> list:
    """Ordered map, optionally over a process pool."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def g2zero_sweep(p: PhysicalParams, spec: SweepSpec, variant: Variant = Variant.SPIN,
                 delta_c0: float | None = None) -> tuple[float, list[dict]]:
    """g2(0) and photon moments on the theta grid, theta = delta_c - delta_c0."""
    variant = Variant(variant)
    if delta_c0 is None:
        delta_c0 = find_reference_detuning(p, variant=variant, cutoff=spec.cutoff)
    jobs = [(p, variant, spec.cutoff, float(t), delta_c0) for t in spec.thetas()]
    return delta_c0, parallel_map(_evaluate, jobs, spec.workers)


def _compare_point(args):
    p, cutoff, theta, delta_c0 = args
    out = {"theta": theta, "delta_c": delta_c0 + theta}
    for v in (Variant.SPIN, Variant.BOSON_KBAR, Variant.BOSON_KBARPRIME):
        out[f"g2_{v.value.replace('-', '_')}"] = evaluate_point(p, v, cutoff, theta, delta_c0)["g2_numeric"]
    return out


COMPARE_COLUMNS = ("theta", "delta_c", "g2_spin", "g2_boson_kbar", "g2_boson_kbarprime")


def model_comparison(p: PhysicalParams, spec: SweepSpec, delta_c0: float | None = None) -> tuple[float, list[dict]]:
    """Spin-bubble against both two-boson anharmonicities on one theta grid.

    All curves share the spin model's reference detuning.
    """
    if delta_c0 is None:
        delta_c0 = find_reference_detuning(p, cutoff=spec.cutoff)
    jobs = [(p, spec.cutoff, float(t), delta_c0) for t in spec.thetas()]
    return delta_c0, parallel_map(_compare_point, jobs, spec.workers)


def g2tau_trace(p: PhysicalParams, theta: float, variant: Variant = Variant.SPIN, tau_max: float = 20.0,
                n_points: int = 400, cutoff: int = 6, delta_c0: float | None = None) -> dynamics.CorrelationTrace:
    """g2(tau) at reduced detuning ``theta``, tagged with the H3 beat period."""
    variant = Variant(variant)
    if tau_max <= 0:
        raise ValueError("tau_max must be positive")
    if delta_c0 is None:
        delta_c0 = find_reference_detuning(p, variant=variant, cutoff=cutoff)
    q = p.replace(delta_c=delta_c0 + theta)
    m = build_model(variant, q, cutoff)
    L = dynamics.build_liouvillian(m)
    rho = dynamics.steady_state(L)
    trace = dynamics.g2_tau(m, rho, np.linspace(0.0, tau_max, n_points), L)
    trace.metadata.update(theta=theta, delta_c0=delta_c0, delta_c=q.delta_c)
    if variant is not Variant.CAVITY:
        omega = build_h3(derive_effective(q), q).oscillation_frequency()
        trace.metadata.update(h3_frequency=omega, h3_period=2 * math.pi / omega)
    return trace


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def write_csv(path: Path, columns: Iterable[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = list(columns)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    return path


def read_csv(path: Path) -> dict[str, np.ndarray | list[str]]:
    """Columns of a CSV written by :func:`write_csv`; non-numeric columns stay strings."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in body]
        try:
            out[name] = np.array([float(x) for x in col])
        except ValueError:
            out[name] = col
    return out
