"""Benchmark grid execution and conservation diagnostics."""

from __future__ import annotations

import gc
import logging
import statistics
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..dense import eigenvalues
from ..integrators import IntegrationResult, StepConfig, integrate
from ..models import IsospectralModel, load_coefficients, make_model
from ..tableaux import gauss
from .config import BenchConfig
from .io import write_trajectory
from .records import RunRecord

__all__ = ["Diagnostics", "diagnostics_report", "run_grid", "run_trajectory", "timing_lock"]

log = logging.getLogger(__name__)

# Timed executions never overlap, even if cells are prepared from several threads.
timing_lock = threading.Lock()


@dataclass(frozen=True)
class Diagnostics:
    """Largest deviation from the initial state over a trajectory.

    ``ham_drift`` is relative to ``|H(W0)|`` (absolute when ``H(W0) == 0``)
    and ``None`` for models without a Hamiltonian. ``group_residual`` is
    ``None`` unless group residuals were supplied.
    """

    spectrum_drift: float
    casimir2_drift: float
    casimir3_drift: float
    ham_drift: float | None
    group_residual: float | None


def diagnostics_report(states: Sequence, model: IsospectralModel | None = None, group_residuals=None) -> Diagnostics:
    """Drift of the spectral invariants (and ``H``) along ``states``.

    Args:
        states: ``W0`` followed by later states; a two-element sequence
            compares the initial and final state only.
        model: Supplies ``H``; omitted or Hamiltonian-free models give
            ``ham_drift=None``.
        group_residuals: Per-step group residuals of scheme B, if any.
    """
    mats = [np.asarray(getattr(W, "matrix", W)) for W in states]
    if not mats:
        raise ValueError("no states given")
    W0 = mats[0]
    ev0 = eigenvalues(W0)
    W0sq = W0 @ W0
    c2_0 = np.trace(W0sq)
    c3_0 = np.trace(W0sq @ W0)
    has_h = model is not None and model.has_hamiltonian
    H0 = model.H(W0) if has_h else None
    spectrum = c2 = c3 = 0.0
    ham = 0.0 if has_h else None
    for W in mats[1:]:
        spectrum = max(spectrum, float(np.max(np.abs(eigenvalues(W) - ev0))))
        Wsq = W @ W
        c2 = max(c2, float(abs(np.trace(Wsq) - c2_0)))
        c3 = max(c3, float(abs(np.trace(Wsq @ W) - c3_0)))
        if has_h:
            dH = abs(model.H(W) - H0)
            ham = max(ham, dH / abs(H0) if H0 != 0 else dH)
    gres = None
    if group_residuals is not None:
        g = [x for x in group_residuals if x is not None]
        gres = max(g) if g else None
    return Diagnostics(spectrum, c2, c3, ham, gres)


@contextmanager
def _timed_region():
    """Serialize timed runs and keep the garbage collector out of them."""
    with timing_lock:
        was_enabled = gc.isenabled()
        gc.collect()
        gc.disable()
        try:
            yield
        finally:
            if was_enabled:
                gc.enable()


def _initial_state(model: IsospectralModel, ic):
    if ic is None:
        return model.initial_state()
    return model.initial_state(load_coefficients(ic))


def run_trajectory(model, W0, scheme, cfg: StepConfig, t_end: float, keep_frames: bool = True):
    """Integrate once, recording frames and per-step group residuals.

    Returns:
        ``(result, frames, diagnostics)`` where ``frames`` starts at ``W0``
        (empty if ``keep_frames`` is false; diagnostics then compare only
        the initial and final states).
    """
    W0m = np.asarray(getattr(W0, "matrix", W0))
    frames = [W0m]
    gres = []

    def observe(k, t, W, rep):
        if keep_frames:
            frames.append(W.matrix)
        gres.append(rep.group_residual)

    result = integrate(model, model.structure, scheme, W0, cfg, t_end, observers=(observe,))
    states = frames if keep_frames else [W0m, result.final.matrix]
    diag = diagnostics_report(states, model, gres)
    return result, (frames if keep_frames else []), diag


def _failed(rec: RunRecord, exc: BaseException) -> RunRecord:
    rec.status = "failed"
    rec.message = f"{type(exc).__name__}: {exc}"
    for name in ("wall_time_s", "fp_iters_mean", "fp_iters_max", "spectrum_drift", "casimir2_drift",
                 "casimir3_drift", "ham_drift", "group_residual"):  # fmt: skip
        setattr(rec, name, None)
    return rec


def run_grid(
    cfg: BenchConfig,
    model_factory: Callable[[str, int], IsospectralModel] = make_model,
) -> list[RunRecord]:
    """Run every ``(N, s, scheme)`` cell of ``cfg``.

    For each ``(N, s)`` the model and ``W0`` are built once, outside any timed
    region. Every scheme then gets one untimed warm-up run, after which the
    ``cfg.reps`` timed repetitions are interleaved across schemes (with the
    scheme order rotated each round) so slow drifts in machine load hit all
    schemes alike. Only the stepping loop is timed; the reported wall time is
    the median. Diagnostics use the final state of the last timed run.

    A cell that raises is recorded with ``status="failed"`` and the error
    message; the rest of the grid still runs. Records come back in
    ``N``-major, then ``s``, then scheme order as listed in ``cfg``.
    """
    records: list[RunRecord] = []
    steps = cfg.steps
    for N in cfg.N:
        try:
            model = model_factory(cfg.model, N)
            W0 = _initial_state(model, cfg.ic)
            setup_error = None
        except Exception as exc:  # noqa: BLE001 - recorded per cell
            setup_error = exc
        for s in cfg.s:
            recs = {sc: RunRecord(cfg.model, N, sc, s, cfg.h, steps) for sc in cfg.schemes}
            records.extend(recs.values())
            if setup_error is not None:
                for rec in recs.values():
                    _failed(rec, setup_error)
                continue
            try:
                step_cfg = StepConfig(
                    tableau=gauss(s), h=cfg.h, fp_tolerance=cfg.fp_tolerance, fp_max_iters=cfg.fp_max_iters
                )
            except Exception as exc:  # noqa: BLE001
                for rec in recs.values():
                    _failed(rec, exc)
                continue
            _run_cell_group(cfg, model, W0, step_cfg, recs)
    return records


def _run_cell_group(cfg: BenchConfig, model, W0, step_cfg: StepConfig, recs: dict[str, RunRecord]):
    live = []
    for sc, rec in recs.items():
        try:
            if cfg.dump_frames:
                _, frames, _ = run_trajectory(model, W0, sc, step_cfg, cfg.t_end)
                meta = {"model": cfg.model, "N": rec.N, "scheme": sc, "s": rec.s, "h": cfg.h}
                name = f"trajectory_{cfg.model}_N{rec.N}_s{rec.s}_{sc}.isoflow"
                write_trajectory(frames, meta, Path(cfg.out) / name)
            else:
                integrate(model, model.structure, sc, W0, step_cfg, cfg.t_end)
            live.append(sc)
        except Exception as exc:  # noqa: BLE001
            log.warning("N=%d s=%d scheme %s failed: %s", rec.N, rec.s, sc, exc)
            _failed(recs[sc], exc)

    times: dict[str, list[float]] = {sc: [] for sc in live}
    last: dict[str, IntegrationResult] = {}
    for rep in range(cfg.reps):
        k = rep % len(live) if live else 0
        for sc in live[k:] + live[:k]:
            if sc not in times:
                continue
            try:
                with _timed_region():
                    res = integrate(model, model.structure, sc, W0, step_cfg, cfg.t_end)
            except Exception as exc:  # noqa: BLE001
                _failed(recs[sc], exc)
                del times[sc]
                continue
            times[sc].append(res.wall_time)
            last[sc] = res

    for sc, ts in times.items():
        rec, res = recs[sc], last[sc]
        rec.wall_time_s = float(statistics.median(ts))
        rec.fp_iters_mean = float(res.fp_iterations_mean)
        rec.fp_iters_max = int(res.fp_iterations_max)
        d = diagnostics_report([W0, res.final], model)
        rec.spectrum_drift = d.spectrum_drift
        rec.casimir2_drift = d.casimir2_drift
        rec.casimir3_drift = d.casimir3_drift
        rec.ham_drift = d.ham_drift
        rec.group_residual = res.group_residual_max
        log.info("N=%d s=%d %s: %.6f s", rec.N, rec.s, sc, rec.wall_time_s)
