"""Grid archive of elite gaits keyed by discretized (squish, wobble)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..errors import ConfigError, ValidationError
from ..evaluation import GaitResult
from ..morphology import Genotype

DEFAULT_GRID_SIZE = 10


@dataclass(frozen=True)
class DescriptorBounds:
    """Per-axis (lo, hi) ranges used to bin descriptors into the grid."""

    squish: tuple[float, float]
    wobble: tuple[float, float]

    def __post_init__(self):
        for name, (lo, hi) in (("squish", self.squish), ("wobble", self.wobble)):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigError(f"bounds.{name} must be finite with lo < hi, got ({lo}, {hi})")
        object.__setattr__(self, "squish", (float(self.squish[0]), float(self.squish[1])))
        object.__setattr__(self, "wobble", (float(self.wobble[0]), float(self.wobble[1])))


def _axis_bin(value: float, lo: float, hi: float, grid_size: int) -> int:
    if not math.isfinite(value):
        raise ValidationError(f"descriptor must be finite to bin, got {value}")
    idx = int(math.floor(grid_size * (value - lo) / (hi - lo)))
    return min(max(idx, 0), grid_size - 1)


def bin_index(
    result: GaitResult, bounds: DescriptorBounds, grid_size: int = DEFAULT_GRID_SIZE
) -> tuple[int, int]:
    """(row, col) cell of a result: row from squish, col from wobble; out-of-range clamps."""
    return (
        _axis_bin(result.squish, *bounds.squish, grid_size),
        _axis_bin(result.wobble, *bounds.wobble, grid_size),
    )


@dataclass
class ArchiveStats:
    offers: int = 0
    inserted: int = 0
    replaced: int = 0
    rejected_worse: int = 0
    rejected_failed: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Elite:
    genotype: Genotype
    result: GaitResult
    cell: tuple[int, int]


class Archive:
    """10x10 grid keeping only the fittest gait seen per cell."""

    def __init__(self, bounds: DescriptorBounds, grid_size: int = DEFAULT_GRID_SIZE):
        if grid_size < 1:
            raise ConfigError("archive grid_size must be >= 1")
        self.bounds = bounds
        self.grid_size = grid_size
        self.stats = ArchiveStats()
        self._cells: dict[tuple[int, int], Elite] = {}

    def offer(self, genotype: Genotype, result: GaitResult) -> bool:
        """Insert/replace if strictly fitter than the incumbent; ties keep the incumbent."""
        self.stats.offers += 1
        if result.failed:
            self.stats.rejected_failed += 1
            return False
        cell = bin_index(result, self.bounds, self.grid_size)
        incumbent = self._cells.get(cell)
        if incumbent is None:
            self._cells[cell] = Elite(genotype, result, cell)
            self.stats.inserted += 1
            return True
        if result.fitness > incumbent.result.fitness:
            self._cells[cell] = Elite(genotype, result, cell)
            self.stats.replaced += 1
            return True
        self.stats.rejected_worse += 1
        return False

    @property
    def occupancy(self) -> int:
        return len(self._cells)

    def qd_score(self) -> float:
        return sum(e.result.fitness for e in self._cells.values())

    def elites(self) -> list[Elite]:
        """All elites in row-major cell order (deterministic)."""
        return [self._cells[c] for c in sorted(self._cells)]

    def cell(self, row: int, col: int) -> Elite | None:
        return self._cells.get((row, col))

    def best(self) -> Elite | None:
        best = None
        for e in self.elites():
            if best is None or e.result.fitness > best.result.fitness:
                best = e
        return best

    def validate(self) -> None:
        """Every stored elite must re-bin to its own cell under current bounds."""
        if self.occupancy > self.grid_size * self.grid_size:
            raise ValidationError("archive occupancy exceeds cell count")
        for cell, elite in self._cells.items():
            rebinned = bin_index(elite.result, self.bounds, self.grid_size)
            if rebinned != cell:
                raise ValidationError(f"elite stored in {cell} re-bins to {rebinned}")

    # serialization: line-delimited JSON, header first, then one line per elite

    def header_dict(self) -> dict:
        return {
            "kind": "archive_header",
            "format": "softgait-archive",
            "version": 1,
            "grid_size": self.grid_size,
            "bounds": {"squish": list(self.bounds.squish), "wobble": list(self.bounds.wobble)},
            "stats": self.stats.as_dict(),
        }

    def to_lines(self) -> list[str]:
        lines = [json.dumps(self.header_dict())]
        for e in self.elites():
            r = e.result
            lines.append(json.dumps({
                "kind": "elite",
                "cell": list(e.cell),
                "genes": list(e.genotype.genes),
                "fitness": r.fitness,
                "squish": r.squish,
                "wobble": r.wobble,
                "com_start_x": r.com_start_x,
                "com_end_x": r.com_end_x,
                "sample_count": r.sample_count,
            }))
        return lines

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Archive":
        it = iter(lines)
        try:
            header = json.loads(next(it))
        except StopIteration:
            raise ValidationError("archive data is empty") from None
        if header.get("kind") != "archive_header" or header.get("format") != "softgait-archive":
            raise ValidationError("not an archive header line")
        bounds = DescriptorBounds(
            tuple(header["bounds"]["squish"]), tuple(header["bounds"]["wobble"])
        )
        archive = cls(bounds, int(header["grid_size"]))
        archive.stats = ArchiveStats(**header["stats"])
        for line in it:
            rec = json.loads(line)
            if rec.get("kind") != "elite":
                raise ValidationError(f"unexpected record kind {rec.get('kind')!r} in archive data")
            result = GaitResult(
                fitness=rec["fitness"],
                squish=rec["squish"],
                wobble=rec["wobble"],
                com_start_x=rec["com_start_x"],
                com_end_x=rec["com_end_x"],
                sample_count=rec["sample_count"],
                failed=False,
            )
            cell = (int(rec["cell"][0]), int(rec["cell"][1]))
            archive._cells[cell] = Elite(Genotype(tuple(rec["genes"])), result, cell)
        archive.validate()
        return archive

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.to_lines()) + "\n")

    @classmethod
    def load(cls, path) -> "Archive":
        return cls.from_lines(Path(path).read_text().splitlines())
