"""One benchmark cell's outcome."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["RunRecord"]


@dataclass
class RunRecord:
    """Timing, fixed-point statistics and conservation diagnostics of one cell.

    ``wall_time_s`` is the median over the timed repetitions. Drifts are
    measured between ``W0`` and the final state of the last timed run. Fields
    that do not apply (``ham_drift`` without a Hamiltonian, ``group_residual``
    outside scheme B) are ``None``, as are all measurements of a failed cell.
    """

    model: str
    N: int
    scheme: str
    s: int
    h: float
    steps: int
    wall_time_s: float | None = None
    fp_iters_mean: float | None = None
    fp_iters_max: int | None = None
    spectrum_drift: float | None = None
    casimir2_drift: float | None = None
    casimir3_drift: float | None = None
    ham_drift: float | None = None
    group_residual: float | None = None
    status: str = "ok"
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_row(self) -> tuple:
        status = self.status if not self.message else f"{self.status}: {self.message}"
        return (
            self.model, self.N, self.scheme, self.s, self.h, self.steps, self.wall_time_s,
            self.fp_iters_mean, self.fp_iters_max, self.spectrum_drift, self.casimir2_drift,
            self.casimir3_drift, self.ham_drift, self.group_residual, status,
        )  # fmt: skip

    @classmethod
    def from_csv_row(cls, vals: dict) -> "RunRecord":
        vals = dict(vals)
        status, _, message = vals.pop("status").partition(": ")
        return cls(**vals, status=status, message=message)
