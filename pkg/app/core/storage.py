"""Run-directory storage: CSV/JSON artifacts with a digest manifest"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .benchgen import LabeledDataset
from .config import settings
from .errors import MissingArtifactError
from .landmarks import LandmarkSet
from .models import StudyResult, SweepRecord
from .network import ModelParameters
from .training import FitResult

logger = logging.getLogger(__name__)

DATASETS = ["train", "val_local", "knowledge", "val_global", "test_local", "test_global"]


class RunStorage:
    """Owns one run directory: data/, landmarks/, sweeps/, studies/ and manifest.json"""

    def __init__(self, root: str, float_format: Optional[str] = None):
        self.root = Path(root)
        self.float_format = float_format or settings.float_format
        self.data_dir = self.root / "data"
        self.landmarks_dir = self.root / "landmarks"
        self.sweeps_dir = self.root / "sweeps"
        self.studies_dir = self.root / "studies"
        self.manifest_path = self.root / "manifest.json"

    # Manifest methods
    def load_manifest(self) -> Dict[str, Any]:
        if not self.manifest_path.exists():
            return {"config": None, "files": {}, "stages": {}}
        return json.loads(self.manifest_path.read_text(encoding="utf-8"))

    def save_manifest(self, manifest: Dict[str, Any]) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def record_stage(self, stage: str, files: Sequence[Path], summary: Dict[str, Any], config: Optional[Dict[str, Any]] = None) -> None:
        """Add digests of the files a stage wrote plus its summary to the manifest"""
        manifest = self.load_manifest()
        if config is not None:
            manifest["config"] = config
        for path in files:
            manifest["files"][self.relative(path)] = self.digest(path)
        manifest["stages"][stage] = summary
        self.save_manifest(manifest)
        logger.info(f"Recorded {len(files)} files for stage {stage} in {self.manifest_path}")

    def relative(self, path: Path) -> str:
        return Path(path).relative_to(self.root).as_posix()

    @staticmethod
    def digest(path: Path) -> str:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()

    def _write_csv(self, frame: pd.DataFrame, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=self.float_format, lineterminator="\n")
        return path

    def _write_json(self, data: Any, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @staticmethod
    def _require(path: Path, subcommand: str) -> Path:
        if not path.exists():
            raise MissingArtifactError(str(path), subcommand)
        return path

    # Dataset methods
    def save_dataset(self, name: str, dataset: LabeledDataset) -> List[Path]:
        """x1..xn,target CSV with a JSON sidecar"""
        columns = {f"x{d + 1}": dataset.inputs[:, d] for d in range(dataset.dim)}
        frame = pd.DataFrame({**columns, "target": dataset.targets})
        sidecar = {
            "benchmark": dataset.meta.get("benchmark"),
            "window": dataset.meta.get("window"),
            "seed": dataset.seed,
            "r": dataset.meta.get("r", 0.0),
            "alpha": dataset.meta.get("alpha", 0.0),
            "w0": dataset.meta.get("w0"),
            "n": len(dataset),
        }
        csv_path = self._write_csv(frame, self.data_dir / f"{name}.csv")
        json_path = self._write_json(sidecar, self.data_dir / f"{name}.json")
        return [csv_path, json_path]

    def load_dataset(self, name: str) -> LabeledDataset:
        csv_path = self._require(self.data_dir / f"{name}.csv", "gen-data")
        frame = pd.read_csv(csv_path, float_precision="round_trip")
        sidecar_path = self.data_dir / f"{name}.json"
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8")) if sidecar_path.exists() else {}
        inputs = frame.drop(columns=["target"]).to_numpy(dtype=float)
        meta = {k: v for k, v in sidecar.items() if k not in ("seed", "n") and v is not None}
        return LabeledDataset(inputs, frame["target"].to_numpy(dtype=float), seed=sidecar.get("seed"), meta=meta)

    def save_anchors(self, anchors: np.ndarray) -> List[Path]:
        frame = pd.DataFrame({f"x{d + 1}": anchors[:, d] for d in range(anchors.shape[1])})
        return [self._write_csv(frame, self.data_dir / "anchors.csv")]

    def load_anchors(self) -> np.ndarray:
        path = self._require(self.data_dir / "anchors.csv", "gen-data")
        return pd.read_csv(path, float_precision="round_trip").to_numpy(dtype=float)

    # Landmark methods
    def save_landmarks(self, landmark_set: LandmarkSet) -> List[Path]:
        """Normalized landmark set as JSON plus a table with input centers mapped back onto Ω"""
        json_path = self._write_json(landmark_set.to_dict(), self.landmarks_dir / "landmarks.json")
        dim = landmark_set.domain.dim
        prototypes = np.array([lm.input.prototype for lm in landmark_set.landmarks], dtype=float).reshape(-1, dim)
        frame = pd.DataFrame(landmark_set.domain.denormalize(prototypes), columns=[f"x{d + 1}" for d in range(dim)])
        frame.insert(0, "cluster", [lm.input.provenance[1] for lm in landmark_set.landmarks])
        frame.insert(0, "context", [lm.input.provenance[0] for lm in landmark_set.landmarks])
        frame["y_center"] = [lm.output.center for lm in landmark_set.landmarks]
        frame["y_spread"] = [lm.output.spread for lm in landmark_set.landmarks]
        frame["specificity"] = [lm.output_specificity for lm in landmark_set.landmarks]
        csv_path = self._write_csv(frame, self.landmarks_dir / "landmarks_native.csv")
        return [json_path, csv_path]

    def load_landmarks(self) -> LandmarkSet:
        path = self._require(self.landmarks_dir / "landmarks.json", "build-landmarks")
        return LandmarkSet.from_dict(json.loads(path.read_text(encoding="utf-8")))

    # Sweep methods
    def save_sweep(self, records: Sequence[SweepRecord], summary: Dict[str, Any]) -> List[Path]:
        frame = pd.DataFrame(
            {
                "lambda": [r.lam for r in records],
                "q1": [r.q1 for r in records],
                "q2": [r.q2 for r in records],
                "q_total": [r.q_total for r in records],
                "valid": [int(r.valid) for r in records],
            }
        )
        csv_path = self._write_csv(frame, self.sweeps_dir / "sweep.csv")
        json_path = self._write_json(summary, self.sweeps_dir / "sweep.json")
        return [csv_path, json_path]

    def save_trace(self, params_ref: str, fit: FitResult) -> Path:
        frame = pd.DataFrame(fit.trace, columns=["epoch", "loss", "loss_data", "loss_knowledge"])
        return self._write_csv(frame, self.sweeps_dir / "traces" / f"{params_ref}.csv")

    def save_params(self, params_ref: str, params: ModelParameters) -> Path:
        return self._write_json(params.to_dict(), self.sweeps_dir / "params" / f"{params_ref}.json")

    # Study methods
    def save_study(self, result: StudyResult) -> List[Path]:
        """Cell CSV, summary CSV and the full result as JSON"""
        cells = pd.DataFrame(
            [c.model_dump(include={"factor", "repeat", "lambda_opt", "dq_abs", "dq_pct"}) for c in result.cells],
            columns=["factor", "repeat", "lambda_opt", "dq_abs", "dq_pct"],
        )
        summaries = pd.DataFrame([s.model_dump() for s in result.summaries], columns=["factor", "median", "min", "max"])
        base = self.studies_dir / result.study
        return [
            self._write_csv(cells, base.with_name(f"{result.study}.csv")),
            self._write_csv(summaries, base.with_name(f"{result.study}_summary.csv")),
            self._write_json(result.model_dump(mode="json"), base.with_name(f"{result.study}.json")),
        ]

    def load_study(self, study: str) -> StudyResult:
        path = self._require(self.studies_dir / f"{study}.json", f"study-{study}")
        return StudyResult.model_validate_json(path.read_text(encoding="utf-8"))

    def has_study(self, study: str) -> bool:
        return (self.studies_dir / f"{study}.json").exists()

    # Report methods
    def save_report(self, text: str, tables: Dict[str, pd.DataFrame]) -> List[Path]:
        self.studies_dir.mkdir(parents=True, exist_ok=True)
        text_path = self.studies_dir / "report.txt"
        text_path.write_text(text, encoding="utf-8")
        paths = [text_path]
        for name, table in tables.items():
            paths.append(self._write_csv(table, self.studies_dir / f"{name}.csv"))
        return paths
