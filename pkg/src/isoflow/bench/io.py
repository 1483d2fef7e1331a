"""Result and trajectory files: CSV, markdown tables and the ISOFLOW1 format."""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import IsoflowError
from .records import RunRecord

__all__ = [
    "CSV_FIELDS",
    "emit_csv",
    "read_csv",
    "emit_markdown_table",
    "markdown_table",
    "write_trajectory",
    "read_trajectory",
    "MAGIC",
    "CONVENTIONS_VERSION",
]

CSV_FIELDS = (
    "model", "N", "scheme", "s", "h", "steps", "wall_time_s", "fp_iters_mean", "fp_iters_max",
    "spectrum_drift", "casimir2_drift", "casimir3_drift", "ham_drift", "group_residual", "status",
)  # fmt: skip
_INT_FIELDS = {"N", "s", "steps", "fp_iters_max"}
_STR_FIELDS = {"model", "scheme", "status"}

MAGIC = b"ISOFLOW1"
CONVENTIONS_VERSION = 1


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        # repr is the shortest string that round-trips, at most 17 digits
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def emit_csv(records, path) -> Path:
    """Write records with the fixed header; floats round-trip exactly."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_FIELDS)
            for r in records:
                w.writerow([_fmt(v) for v in r.csv_row()])
    except OSError as exc:
        raise IsoflowError(f"{path}: cannot write CSV: {exc}") from exc
    return path


def read_csv(path) -> list[RunRecord]:
    """Parse a file written by :func:`emit_csv`."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise IsoflowError(f"{path}: cannot read CSV: {exc}") from exc
    out = []
    for i, row in enumerate(rows, start=2):
        if set(row) != set(CSV_FIELDS):
            raise IsoflowError(f"{path}:{i}: unexpected columns")
        vals = {}
        for key in CSV_FIELDS:
            raw = row[key]
            if key in _STR_FIELDS:
                vals[key] = raw
            elif raw == "":
                vals[key] = None
            elif key in _INT_FIELDS:
                vals[key] = int(raw)
            else:
                vals[key] = float(raw)
        out.append(RunRecord.from_csv_row(vals))
    return out


def markdown_table(records) -> str:
    """Wall times laid out with one block per N, one row per scheme and one column per s.

    The fastest scheme of each ``(N, s)`` cell is marked in bold and named in
    the trailing ``winner`` row.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to tabulate")
    Ns = sorted({r.N for r in records})
    ss = sorted({r.s for r in records})
    schemes = sorted({r.scheme for r in records})
    cell = {(r.N, r.s, r.scheme): r for r in records}
    winners = {}
    for N in Ns:
        for s in ss:
            ok = [cell[N, s, sc] for sc in schemes if (N, s, sc) in cell and cell[N, s, sc].ok]
            if ok:
                winners[N, s] = min(ok, key=lambda r: r.wall_time_s).scheme

    header = "| N | scheme | " + " | ".join(f"s={s}" for s in ss) + " |"
    lines = [header, "|" + "---|" * (len(ss) + 2)]
    for N in Ns:
        for sc in schemes:
            row = [str(N), sc]
            for s in ss:
                r = cell.get((N, s, sc))
                if r is None:
                    row.append("")
                elif not r.ok:
                    row.append("failed")
                else:
                    t = f"{r.wall_time_s:.6f}"
                    row.append(f"**{t}**" if winners.get((N, s)) == sc else t)
            lines.append("| " + " | ".join(row) + " |")
        lines.append("| " + str(N) + " | winner | " + " | ".join(winners.get((N, s), "-") for s in ss) + " |")
    return "\n".join(lines) + "\n"


def emit_markdown_table(records, path) -> Path:
    text = markdown_table(records)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise IsoflowError(f"{path}: cannot write markdown: {exc}") from exc
    return path


def write_trajectory(frames, metadata: dict, path) -> Path:
    """Write frames in the ISOFLOW1 binary format.

    Layout: ``ISOFLOW1``, uint32 LE metadata length, UTF-8 JSON metadata,
    uint64 LE frame count, then each frame as row-major complex128 LE.
    ``metadata`` is stored as given with ``conventions_version`` added.
    """
    frames = [np.asarray(getattr(f, "matrix", f)) for f in frames]
    N = metadata.get("N")
    if frames:
        N = frames[0].shape[0] if N is None else N
        for k, f in enumerate(frames):
            if f.shape != (N, N):
                raise IsoflowError(f"frame {k} has shape {f.shape}, expected ({N}, {N})")
    meta = dict(metadata)
    meta.setdefault("conventions_version", CONVENTIONS_VERSION)
    if N is not None:
        meta["N"] = int(N)
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)
            fh.write(struct.pack("<Q", len(frames)))
            for f in frames:
                fh.write(np.ascontiguousarray(f, dtype="<c16").tobytes())
    except OSError as exc:
        raise IsoflowError(f"{path}: cannot write trajectory: {exc}") from exc
    return path


def read_trajectory(path) -> tuple[list[np.ndarray], dict]:
    """Inverse of :func:`write_trajectory`; returns ``(frames, metadata)``."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IsoflowError(f"{path}: cannot read trajectory: {exc}") from exc
    if data[:8] != MAGIC:
        raise IsoflowError(f"{path}: not an ISOFLOW1 file")
    (mlen,) = struct.unpack_from("<I", data, 8)
    meta = json.loads(data[12 : 12 + mlen].decode("utf-8"))
    off = 12 + mlen
    (count,) = struct.unpack_from("<Q", data, off)
    off += 8
    N = meta.get("N")
    if count and N is None:
        raise IsoflowError(f"{path}: metadata lacks N")
    size = 0 if not count else N * N * 16
    if len(data) != off + count * size:
        raise IsoflowError(f"{path}: expected {count} frames of {size} bytes, file size mismatch")
    frames = [
        np.frombuffer(data, dtype="<c16", count=N * N, offset=off + k * size).reshape(N, N).astype(np.complex128)
        for k in range(count)
    ]
    return frames, meta

