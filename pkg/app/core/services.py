"""Stage services behind the command-line front end"""

import logging
from typing import Any, Dict, List

import pandas as pd

from . import experiments
from .errors import ConfigurationError, KDError, MissingArtifactError, UndefinedRelativeError
from .experiments import RunData
from .models import RunConfig, StudyResult
from .storage import DATASETS, RunStorage
from .training import delta_q, evaluate_test_phase

logger = logging.getLogger(__name__)

STUDIES = {
    "windows": experiments.window_study,
    "noise": experiments.noise_study,
    "width": experiments.width_study,
}


def _failure(error: Exception) -> Dict[str, Any]:
    """Result dict for a failed stage; usage errors are told apart from runtime ones"""
    usage = isinstance(error, (ConfigurationError, MissingArtifactError))
    return {
        "success": False,
        "error": str(error),
        "error_type": "usage" if usage else "runtime",
    }


def _config_summary(cfg: RunConfig) -> Dict[str, Any]:
    return cfg.model_dump(mode="json", exclude={"jobs", "output_dir"})


class DataService:
    """Service for dataset generation"""

    @staticmethod
    def generate(cfg: RunConfig, storage: RunStorage) -> Dict[str, Any]:
        """Write local, knowledge, validation and test datasets plus the anchor set"""
        try:
            data = experiments.generate_run_data(cfg)
            files = []
            for name in DATASETS:
                files.extend(storage.save_dataset(name, getattr(data, name)))
            files.extend(storage.save_anchors(data.anchors))
            summary = {
                "window": data.window_id,
                "r": data.r,
                "alpha": data.alpha,
                "seed": data.seed,
                "sizes": {name: len(getattr(data, name)) for name in DATASETS},
                "anchors": int(data.anchors.shape[0]),
            }
            storage.record_stage("gen-data", files, summary, config=_config_summary(cfg))
            return {
                "success": True,
                "message": f"Generated {len(DATASETS)} datasets and {data.anchors.shape[0]} anchors",
                "files": [storage.relative(p) for p in files],
            }
        except KDError as e:
            logger.error(f"gen-data failed: {e}")
            return _failure(e)


class LandmarkService:
    """Service for knowledge landmark construction"""

    @staticmethod
    def build(cfg: RunConfig, storage: RunStorage, jobs: int = 1) -> Dict[str, Any]:
        try:
            knowledge = storage.load_dataset("knowledge")
            landmark_set = experiments.build_run_landmarks(cfg, knowledge, cfg.seed, jobs)
            files = storage.save_landmarks(landmark_set)
            summary = {
                "count": len(landmark_set),
                "contexts": [{"index": c.index, "center": c.granule.center, "spread": c.granule.spread} for c in landmark_set.contexts],
                "clusters": cfg.cluster_count(),
                "diagnostics": landmark_set.diagnostics,
            }
            storage.record_stage("build-landmarks", files, summary)
            return {
                "success": True,
                "message": f"Built {len(landmark_set)} landmarks",
                "files": [storage.relative(p) for p in files],
            }
        except KDError as e:
            logger.error(f"build-landmarks failed: {e}")
            return _failure(e)


class SweepService:
    """Service for the λ sweep on stored datasets and landmarks"""

    @staticmethod
    def load_run_data(cfg: RunConfig, storage: RunStorage) -> RunData:
        datasets = {name: storage.load_dataset(name) for name in DATASETS}
        train = datasets["train"]
        return RunData(
            **datasets,
            anchors=storage.load_anchors(),
            window_id=str(train.meta.get("window", cfg.window)),
            r=float(datasets["knowledge"].meta.get("r", cfg.width_ratio)),
            alpha=float(train.meta.get("alpha", 0.0)),
            seed=train.seed if train.seed is not None else cfg.seed,
        )

    @staticmethod
    def run(cfg: RunConfig, storage: RunStorage, jobs: int = 1) -> Dict[str, Any]:
        try:
            data = SweepService.load_run_data(cfg, storage)
            landmark_set = storage.load_landmarks()
            result = experiments.run_sweep(cfg, data, landmark_set, jobs=jobs)

            files = []
            for record, fit in zip(result.records, result.fits):
                if fit is None:
                    continue
                files.append(storage.save_params(record.params_ref, fit.params))
                files.append(storage.save_trace(record.params_ref, fit))

            summary: Dict[str, Any] = {
                "grid_step": cfg.grid_step,
                "grid_size": len(result.records),
                "lambda_opt": result.lambda_opt,
                "invalid": [r.lam for r in result.records if not r.valid],
                "window": data.window_id,
                "alpha": data.alpha,
                "r": data.r,
                "train": cfg.train.model_copy(update={"seed": data.seed}).model_dump(mode="json"),
            }
            if result.lambda_opt is not None:
                opt = result.record_at(result.lambda_opt)
                base = result.record_at(1.0)
                summary.update(params_ref=opt.params_ref, q1=opt.q1, q2=opt.q2, q_total=opt.q_total)
                if base.valid:
                    try:
                        dq_abs, dq_pct = delta_q(base, opt)
                    except UndefinedRelativeError:
                        dq_abs, dq_pct = base.q_total - opt.q_total, None
                    summary.update(base_q_total=base.q_total, dq_abs=dq_abs, dq_pct=dq_pct)
                domain = landmark_set.domain
                test_q1, test_q2, test_total = evaluate_test_phase(
                    result.fit_at(result.lambda_opt).params,
                    data.test_local.normalized(domain),
                    data.test_global.normalized(domain),
                )
                summary.update(test_q1=test_q1, test_q2=test_q2, test_q_total=test_total)

            files = storage.save_sweep(result.records, summary) + files
            storage.record_stage("sweep", files, summary)
            if result.lambda_opt is None:
                return {"success": False, "error": "every fit in the sweep diverged", "error_type": "runtime"}
            return {
                "success": True,
                "message": f"Sweep over {len(result.records)} lambda values, lambda_opt={result.lambda_opt:.2f}",
                "lambda_opt": result.lambda_opt,
                "files": [storage.relative(p) for p in files[:2]],
            }
        except KDError as e:
            logger.error(f"sweep failed: {e}")
            return _failure(e)


class StudyService:
    """Service for the window, noise and width studies"""

    @staticmethod
    def run(study: str, cfg: RunConfig, storage: RunStorage, jobs: int = 1) -> Dict[str, Any]:
        try:
            result: StudyResult = STUDIES[study](cfg, jobs=jobs)
            files = storage.save_study(result)
            summary = {
                "metric": result.metric,
                "repeats": result.repeats,
                "trend": result.trend,
                "summaries": [s.model_dump() for s in result.summaries],
                "grid_step": (cfg.noise_grid_step or cfg.grid_step) if study == "noise" else cfg.grid_step,
                "epochs": cfg.train.epochs,
            }
            storage.record_stage(f"study-{study}", files, summary, config=_config_summary(cfg))
            return {
                "success": True,
                "message": f"Study {study}: {len(result.cells)} cells over {len(result.summaries)} factor values",
                "trend": result.trend,
                "files": [storage.relative(p) for p in files],
            }
        except KDError as e:
            logger.error(f"study-{study} failed: {e}")
            return _failure(e)


class ReportService:
    """Service for the improvement and trend tables"""

    @staticmethod
    def window_table(result: StudyResult) -> pd.DataFrame:
        """Per window medians over repeats: λ_opt, Q₁, Q₂, Q₁+Q₂ for KD and baseline, improvement %"""
        frame = pd.DataFrame([c.model_dump() for c in result.cells])
        frame["q_kd"] = frame["q1_kd"] + frame["q2_kd"]
        frame["q_base"] = frame["q1_base"] + frame["q2_base"]
        columns = ["lambda_opt", "q1_kd", "q2_kd", "q_kd", "q1_base", "q2_base", "q_base", "dq_pct"]
        order = [s.factor for s in result.summaries]
        table = frame.groupby("factor", sort=False)[columns].median().reindex(order)
        table = table.rename(columns={"dq_pct": "improvement_pct"})
        return table.reset_index().rename(columns={"factor": "window"})

    @staticmethod
    def summary_table(result: StudyResult) -> pd.DataFrame:
        return pd.DataFrame([s.model_dump() for s in result.summaries], columns=["factor", "median", "min", "max"])

    @staticmethod
    def render(storage: RunStorage) -> Dict[str, Any]:
        """Aligned text plus CSV for every study present in the run directory"""
        try:
            present = [study for study in STUDIES if storage.has_study(study)]
            if not present:
                raise MissingArtifactError(str(storage.studies_dir / "windows.json"), "study-windows")

            sections: List[str] = []
            tables: Dict[str, pd.DataFrame] = {}
            for study in present:
                result = storage.load_study(study)
                if study == "windows":
                    table = ReportService.window_table(result)
                    name, title = "report", f"Improvement of Q = Q1 + Q2 ({result.benchmark}, median of {result.repeats})"
                else:
                    table = ReportService.summary_table(result)
                    name, title = f"report_{study}", f"Median lambda_opt per {study} level ({result.benchmark})"
                tables[name] = table
                text = table.to_string(index=False, float_format=lambda v: f"{v:.4f}")
                trend = "" if result.trend is None else f"\nSpearman trend: {result.trend:+.3f}"
                sections.append(f"{title}\n{text}{trend}\n")

            report = "\n".join(sections)
            files = storage.save_report(report, tables)
            storage.record_stage("report", files, {"studies": present})
            return {
                "success": True,
                "report": report,
                "files": [storage.relative(p) for p in files],
            }
        except KDError as e:
            logger.error(f"report failed: {e}")
            return _failure(e)
