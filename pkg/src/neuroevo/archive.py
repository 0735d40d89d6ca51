"""Results archive on disk.

Layout of an archive directory::

    config.ini              config snapshot plus [meta] (rng, tool version)
    summary.csv             one row per run
    runs/run_NNN.csv        GenerationLog rows
    runs/run_NNN.genome     final champion, binary format below
    timestamps.json         wall-clock sidecar, the only non-deterministic file

Genome files are little-endian::

    bytes 0-3    magic b"NEVG"
    bytes 4-5    uint16 format version (1)
    byte  6      uint8 kind: 0 dense, 1 sparse
    byte  7      uint8 number of layers L
    4*L bytes    uint32 layer sizes
    dense:       parameter_count float64 weights
    sparse:      ceil(parameter_count / 8) mask bytes, bit i at byte i // 8, bit i % 8
                 (least significant first); uint32 nnz; nnz float64 active weights
                 in index order
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, seeding
from .config import ExperimentConfig, from_ini, to_ini
from .errors import InputError
from .ga import RunResult
from .network import NetworkShape
from .stats import LOG_FIELDS, GenerationLog, RunSet

MAGIC = b"NEVG"
FORMAT_VERSION = 1
SUMMARY_FIELDS = ("run", "generations", "first_solve", "solved_generation", "final_top_score",
                  "final_mean_score", "champion_check")


class ArchiveError(InputError):
    """An archive or genome record is missing or malformed."""


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def encode_genome(weights, layer_sizes, mask=None) -> bytes:
    weights = np.asarray(weights, dtype="<f8")
    header = MAGIC + struct.pack("<HBB", FORMAT_VERSION, 0 if mask is None else 1, len(layer_sizes))
    header += struct.pack(f"<{len(layer_sizes)}I", *layer_sizes)
    if mask is None:
        return header + weights.tobytes()
    mask = np.asarray(mask, dtype=bool)
    bits = np.packbits(mask, bitorder="little").tobytes()
    values = weights[mask]
    return header + bits + struct.pack("<I", len(values)) + values.astype("<f8").tobytes()


def decode_genome(data: bytes) -> tuple[np.ndarray, tuple[int, ...], np.ndarray | None]:
    """Inverse of :func:`encode_genome`: ``(weights, layer_sizes, mask_or_None)``."""
    try:
        if data[:4] != MAGIC:
            raise ArchiveError("not a genome record (bad magic)")
        version, kind, n_layers = struct.unpack_from("<HBB", data, 4)
        if version != FORMAT_VERSION or kind not in (0, 1):
            raise ArchiveError(f"unsupported genome record (version {version}, kind {kind})")
        sizes = struct.unpack_from(f"<{n_layers}I", data, 8)
        count = NetworkShape(sizes).parameter_count
        offset = 8 + 4 * n_layers
        if kind == 0:
            if len(data) != offset + 8 * count:
                raise ArchiveError("dense genome record has the wrong length")
            return np.frombuffer(data, "<f8", count, offset).astype(np.float64), sizes, None
        n_bytes = math.ceil(count / 8)
        mask = np.unpackbits(np.frombuffer(data, np.uint8, n_bytes, offset), count=count,
                             bitorder="little").astype(bool)
        (nnz,) = struct.unpack_from("<I", data, offset + n_bytes)
        start = offset + n_bytes + 4
        if nnz != mask.sum() or len(data) != start + 8 * nnz:
            raise ArchiveError("sparse genome record is inconsistent")
        weights = np.zeros(count)
        weights[mask] = np.frombuffer(data, "<f8", nnz, start)
        return weights, sizes, mask
    except (struct.error, ValueError) as exc:
        if isinstance(exc, ArchiveError):
            raise
        raise ArchiveError(f"corrupt genome record: {exc}") from None


def logs_to_csv(logs: list[GenerationLog]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LOG_FIELDS)
    for log in logs:
        row = log.as_row()
        writer.writerow([_fmt(row[f]) for f in LOG_FIELDS])
    return buf.getvalue()


def logs_from_csv(text: str) -> list[GenerationLog]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != LOG_FIELDS:
        raise ArchiveError(f"unexpected log header {reader.fieldnames}")
    return [GenerationLog.from_row(row) for row in reader]


def write_archive(out_dir, config: ExperimentConfig, results: list[RunResult],
                  timestamps: dict | None = None) -> Path:
    out = Path(out_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    meta = {"meta": {"rng": seeding.RNG_SPEC, "tool_version": __version__,
                     "genome_format": f"NEVG v{FORMAT_VERSION} little-endian"}}
    (out / "config.ini").write_text(to_ini(config, meta))

    threshold = config.ga.solve_threshold * config.ga.episodes_per_eval
    rows = []
    for i, res in enumerate(results):
        (runs_dir / f"run_{i:03d}.csv").write_text(logs_to_csv(res.logs))
        (runs_dir / f"run_{i:03d}.genome").write_bytes(
            encode_genome(res.champion, config.network.layer_sizes, res.champion_mask))
        first = next((log.generation for log in res.logs if log.top_score >= threshold), None)
        last = res.logs[-1]
        rows.append((i, len(res.logs), first, res.solved_generation, last.top_score, last.mean_score,
                     last.solve_check))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    writer.writerows([[_fmt(v) for v in row] for row in rows])
    (out / "summary.csv").write_text(buf.getvalue())
    if timestamps is not None:
        (out / "timestamps.json").write_text(json.dumps(timestamps, indent=2) + "\n")
    return out


@dataclass
class Archive:
    path: Path
    config: ExperimentConfig
    logs: list[list[GenerationLog]]

    @property
    def algorithm(self) -> str:
        return self.config.algorithm

    def runset(self, tag: str | None = None) -> RunSet:
        return RunSet(tag or self.algorithm, self.logs, horizon=self.config.ga.max_generations)

    def champion(self, run: int) -> tuple[np.ndarray, np.ndarray | None]:
        path = self.path / "runs" / f"run_{run:03d}.genome"
        if not path.exists():
            raise ArchiveError(f"missing champion record {path}")
        weights, sizes, mask = decode_genome(path.read_bytes())
        if tuple(sizes) != self.config.network.layer_sizes:
            raise ArchiveError(f"champion shape {sizes} does not match config {self.config.network.layer_sizes}")
        return weights, mask


def read_archive(path) -> Archive:
    path = Path(path)
    cfg_path = path / "config.ini"
    if not cfg_path.exists():
        raise ArchiveError(f"{path} is not an archive (no config.ini)")
    config = from_ini(cfg_path.read_text())
    logs = []
    for run in range(config.runs):
        csv_path = path / "runs" / f"run_{run:03d}.csv"
        if not csv_path.exists():
            raise ArchiveError(f"missing run log {csv_path}")
        logs.append(logs_from_csv(csv_path.read_text()))
    return Archive(path, config, logs)
