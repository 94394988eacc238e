"""Trial records and the run manifest: line-delimited JSON with versioned headers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ValidationError
from ..evaluation import GaitResult
from ..morphology import Genotype
from ..optimize import Archive

TRIAL_FORMAT = "softgait-trial"
TRIAL_VERSION = 1
MANIFEST_NAME = "manifest.json"

ALGORITHMS = ("cma", "qda")


def result_to_dict(r: GaitResult) -> dict:
    return {
        "fitness": r.fitness,
        "squish": r.squish,
        "wobble": r.wobble,
        "com_start_x": r.com_start_x,
        "com_end_x": r.com_end_x,
        "sample_count": r.sample_count,
        "failed": r.failed,
    }


def result_from_dict(d: dict) -> GaitResult:
    return GaitResult(
        fitness=d["fitness"],
        squish=d["squish"],
        wobble=d["wobble"],
        com_start_x=d["com_start_x"],
        com_end_x=d["com_end_x"],
        sample_count=d["sample_count"],
        failed=d["failed"],
    )


@dataclass
class TrialRecord:
    """One optimization trial: training outcome plus per-terrain transfer fitness."""

    terrain: str
    algorithm: str
    trial: int
    seed: int
    training_best_fitness: float | None = None
    training_evals: int = 0
    champion: Genotype | None = None
    champion_result: GaitResult | None = None
    archive: Archive | None = None
    transfers: dict[str, float] = field(default_factory=dict)
    transfer_evals: int = 0
    failed_transfer_evals: int = 0
    failed: bool = False
    error: str | None = None

    @property
    def transferred(self) -> bool:
        return bool(self.transfers)

    def to_lines(self) -> list[str]:
        lines = [json.dumps({
            "kind": "trial_header",
            "format": TRIAL_FORMAT,
            "version": TRIAL_VERSION,
            "terrain": self.terrain,
            "algorithm": self.algorithm,
            "trial": self.trial,
            "seed": self.seed,
        })]
        lines.append(json.dumps({
            "kind": "training",
            "best_fitness": self.training_best_fitness,
            "evals": self.training_evals,
            "failed": self.failed,
            "error": self.error,
        }))
        if self.champion is not None:
            lines.append(json.dumps({
                "kind": "champion",
                "genes": list(self.champion.genes),
                "result": result_to_dict(self.champion_result),
            }))
        if self.archive is not None:
            lines.extend(self.archive.to_lines())
        if self.transfers:
            lines.append(json.dumps({
                "kind": "transfers",
                "fitness": self.transfers,
                "evals": self.transfer_evals,
                "failed_evals": self.failed_transfer_evals,
            }))
        return lines

    @classmethod
    def from_lines(cls, lines: list[str]) -> "TrialRecord":
        if not lines:
            raise ValidationError("trial record is empty")
        header = json.loads(lines[0])
        if header.get("format") != TRIAL_FORMAT:
            raise ValidationError("not a trial record header")
        if header.get("version") != TRIAL_VERSION:
            raise ValidationError(f"unsupported trial record version {header.get('version')}")
        rec = cls(
            terrain=header["terrain"],
            algorithm=header["algorithm"],
            trial=header["trial"],
            seed=header["seed"],
        )
        archive_lines: list[str] = []
        for line in lines[1:]:
            kind = json.loads(line).get("kind")
            if kind == "training":
                d = json.loads(line)
                rec.training_best_fitness = d["best_fitness"]
                rec.training_evals = d["evals"]
                rec.failed = d["failed"]
                rec.error = d["error"]
            elif kind == "champion":
                d = json.loads(line)
                rec.champion = Genotype(tuple(d["genes"]))
                rec.champion_result = result_from_dict(d["result"])
            elif kind in ("archive_header", "elite"):
                archive_lines.append(line)
            elif kind == "transfers":
                d = json.loads(line)
                rec.transfers = dict(d["fitness"])
                rec.transfer_evals = d["evals"]
                rec.failed_transfer_evals = d["failed_evals"]
            else:
                raise ValidationError(f"unexpected record kind {kind!r} in trial record")
        if archive_lines:
            rec.archive = Archive.from_lines(archive_lines)
        return rec

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(self.to_lines()) + "\n")

    @classmethod
    def load(cls, path) -> "TrialRecord":
        return cls.from_lines(Path(path).read_text().splitlines())


def record_path(root, terrain: str, algorithm: str, trial: int) -> Path:
    return Path(root) / "results" / terrain / algorithm / f"trial_{trial}.jsonl"


def find_record_paths(root) -> list[Path]:
    results = Path(root) / "results"
    if not results.is_dir():
        return []
    return sorted(results.glob("*/*/trial_*.jsonl"))
