"""Correlation-memory accounting and the naive-vs-restricted benchmark."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .correspondence import (
    DEFAULT_NAIVE_PIXEL_CAP,
    EntryLedger,
    naive_full_correlation,
    region_correlation,
)
from .features import FeatureMap
from .types import InvalidArgumentError, LabelMap, RegionIndex, label_region_specs


@dataclass(frozen=True)
class RegionEntryCount:
    region: str
    rows: int
    cols: int

    @property
    def entries(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class MemoryReport:
    """Predicted and measured correlation-entry counts for one frame size."""

    width: int
    height: int
    per_region: tuple[RegionEntryCount, ...]
    measured_entries: int | None = None

    @property
    def naive_entries(self) -> int:
        wh = self.width * self.height
        return wh * wh

    @property
    def restricted_entries(self) -> int:
        return sum(r.entries for r in self.per_region)

    @property
    def ratio(self) -> float | None:
        """naive / restricted; None when no entries are restricted-computed."""
        restricted = self.restricted_entries
        if restricted == 0:
            return None
        return self.naive_entries / restricted

    def to_kv(self, prefix: str = "memory") -> list[str]:
        lines = [
            f"{prefix}.width = {self.width}",
            f"{prefix}.height = {self.height}",
            f"{prefix}.naive_entries = {self.naive_entries}",
            f"{prefix}.restricted_entries = {self.restricted_entries}",
            f"{prefix}.ratio = {'undefined' if self.ratio is None else f'{self.ratio:.6f}'}",
        ]
        for r in self.per_region:
            lines.append(f"{prefix}.region.{r.region} = {r.rows}x{r.cols}={r.entries}")
        if self.measured_entries is not None:
            lines.append(f"{prefix}.measured_entries = {self.measured_entries}")
        return lines

    def to_text(self) -> str:
        ratio = "undefined" if self.ratio is None else f"{self.ratio:.2f}x"
        lines = [
            f"frame {self.width}x{self.height}: naive {self.naive_entries} entries, "
            f"restricted {self.restricted_entries} entries, reduction {ratio}",
        ]
        for r in self.per_region:
            lines.append(f"  {r.region:<12} {r.rows:>8} x {r.cols:<8} = {r.entries}")
        if self.measured_entries is not None:
            ok = "OK" if self.measured_entries == self.restricted_entries else "MISMATCH"
            lines.append(f"  measured entries: {self.measured_entries} [{ok}]")
        return "\n".join(lines)


def memory_report(
    animated_regions: Sequence[RegionIndex],
    target_regions: Sequence[RegionIndex],
    width: int,
    height: int,
    measured_entries: int | None = None,
) -> MemoryReport:
    """Account naive (wh)^2 vs restricted sum_r N_A^r * N_T^r entries."""
    if len(animated_regions) != len(target_regions):
        raise InvalidArgumentError("animated and target region lists differ in length")
    per_region = []
    for a, t in zip(animated_regions, target_regions):
        if a.name != t.name:
            raise InvalidArgumentError(f"region pair mismatch: {a.name!r} vs {t.name!r}")
        per_region.append(RegionEntryCount(a.name, len(a), len(t)))
    return MemoryReport(width, height, tuple(per_region), measured_entries)


@dataclass(frozen=True)
class BenchRow:
    width: int
    height: int
    report: MemoryReport
    naive_seconds: float | None  # None when the naive arm hit the pixel cap
    restricted_seconds: float


@dataclass(frozen=True)
class BenchResult:
    rows: tuple[BenchRow, ...]

    def to_text(self) -> str:
        header = (
            f"{'size':>9} {'naive entries':>14} {'naive ms':>10} "
            f"{'restricted':>12} {'restr ms':>10} {'ratio':>10} {'measured':>10}"
        )
        lines = [header, "-" * len(header)]
        for row in self.rows:
            rep = row.report
            naive_ms = "skipped(cap)" if row.naive_seconds is None else f"{row.naive_seconds * 1e3:.1f}"
            ratio = "undefined" if rep.ratio is None else f"{rep.ratio:.2f}x"
            measured = "-" if rep.measured_entries is None else str(rep.measured_entries)
            lines.append(
                f"{rep.width}x{rep.height:<5} {rep.naive_entries:>14} {naive_ms:>10} "
                f"{rep.restricted_entries:>12} {row.restricted_seconds * 1e3:>10.1f} "
                f"{ratio:>10} {measured:>10}"
            )
        return "\n".join(lines)

    def to_kv(self) -> list[str]:
        lines = []
        for i, row in enumerate(self.rows):
            prefix = f"bench.{i}"
            lines.extend(row.report.to_kv(prefix))
            naive = "skipped(cap)" if row.naive_seconds is None else f"{row.naive_seconds:.6f}"
            lines.append(f"{prefix}.naive_seconds = {naive}")
            lines.append(f"{prefix}.restricted_seconds = {row.restricted_seconds:.6f}")
        return lines


def region_pairs_from_labels(
    labels_animated: LabelMap, labels_target: LabelMap
) -> tuple[list[RegionIndex], list[RegionIndex]]:
    """The six label-defined region index pairs of a frame pair."""
    animated, target = [], []
    for spec in label_region_specs():
        animated.append(RegionIndex.from_labels(labels_animated, spec))
        target.append(RegionIndex.from_labels(labels_target, spec))
    return animated, target


def run_bench(
    sizes: Sequence[int],
    head_fraction: float = 0.35,
    repetitions: int = 3,
    naive_pixel_cap: int = DEFAULT_NAIVE_PIXEL_CAP,
    channels: int = 8,
    seed: int = 0,
) -> BenchResult:
    """Time and count naive vs region-restricted correlation per frame size.

    Synthetic label maps place roughly ``head_fraction`` of the pixels in
    head regions. The measured entry count of the restricted arm must
    equal the predicted sum_r N_A^r * N_T^r; a mismatch raises.
    """
    from .synth import synthetic_labels  # local import avoids a cycle

    if repetitions < 1:
        raise InvalidArgumentError(f"repetitions must be >= 1, got {repetitions}")
    rows: list[BenchRow] = []
    rng = np.random.default_rng(seed)
    for size in sizes:
        labels_a = synthetic_labels(size, size, head_fraction, np.random.default_rng(seed + 1))
        labels_t = synthetic_labels(size, size, head_fraction, np.random.default_rng(seed + 2))
        f_a = FeatureMap(rng.standard_normal((size, size, channels)).astype(np.float32))
        f_t = FeatureMap(rng.standard_normal((size, size, channels)).astype(np.float32))
        animated_regions, target_regions = region_pairs_from_labels(labels_a, labels_t)

        naive_seconds: float | None = None
        if size * size <= naive_pixel_cap:
            times = []
            for _ in range(repetitions):
                t0 = time.perf_counter()
                naive_full_correlation(f_a, f_t, max_pixels=naive_pixel_cap)
                times.append(time.perf_counter() - t0)
            naive_seconds = min(times)

        times = []
        measured = 0
        for rep in range(repetitions):
            ledger = EntryLedger()
            t0 = time.perf_counter()
            for a_idx, t_idx in zip(animated_regions, target_regions):
                if len(a_idx) and len(t_idx):
                    region_correlation(f_a, f_t, a_idx, t_idx, ledger=ledger)
            times.append(time.perf_counter() - t0)
            measured = ledger.entries

        report = memory_report(animated_regions, target_regions, size, size, measured)
        predicted = sum(
            len(a) * len(t) for a, t in zip(animated_regions, target_regions)
        )
        if measured != predicted:
            raise RuntimeError(
                f"instrumented entry count {measured} != predicted {predicted} at size {size}"
            )
        rows.append(BenchRow(size, size, report, naive_seconds, min(times)))
    return BenchResult(tuple(rows))
