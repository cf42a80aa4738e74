"""HTTP facade over the core package.

Every endpoint wraps one harness operation; file paths in requests are
resolved on the machine the service runs on. Domain exceptions map to a
structured error body whose ``error_code`` the CLI translates into exit
codes (config_error -> 2, data_error -> 3, numeric_abort -> 4).
"""

import os

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..checkpoint import load_model
from ..errors import ConfigError, DataError, NumericAbort
from ..harness import analyze
from ..harness.ablate import rows_to_csv, run_ablations
from ..harness.config import parse_config
from ..harness.evaluate import evaluate
from ..harness.infer import infer_file, load_image, save_image
from ..harness.train import train
from ..synthdata import load_folder_dataset, make_dataset, save_dataset
from . import schemas

app = FastAPI(title="allclear", version=__version__)


@app.exception_handler(ConfigError)
def _config_error(request: Request, exc: ConfigError):
    return JSONResponse(
        status_code=400, content={"error_code": "config_error", "detail": str(exc)}
    )


@app.exception_handler(DataError)
def _data_error(request: Request, exc: DataError):
    return JSONResponse(
        status_code=404, content={"error_code": "data_error", "detail": str(exc)}
    )


@app.exception_handler(NumericAbort)
def _numeric_abort(request: Request, exc: NumericAbort):
    return JSONResponse(
        status_code=500,
        content={
            "error_code": "numeric_abort",
            "detail": f"{exc} (step {exc.step}, batch seed {exc.batch_seed})",
        },
    )


@app.exception_handler(RequestValidationError)
def _validation_error(request: Request, exc: RequestValidationError):
    return JSONResponse(
        status_code=400, content={"error_code": "config_error", "detail": str(exc)}
    )


def _report_model(report):
    return schemas.MetricsReportModel(
        weathers={
            tag: schemas.WeatherMetricsModel(
                psnr=m.psnr,
                ssim=m.ssim,
                baseline_psnr=m.baseline_psnr,
                baseline_ssim=m.baseline_ssim,
                count=m.count,
            )
            for tag, m in report.weathers.items()
        },
        config_hash=report.config_hash,
    )


def _dataset_from(data_dir, n_per_weather, image_size, seed):
    if data_dir:
        return load_folder_dataset(data_dir)
    return make_dataset(n_per_weather, image_size, master_seed=seed)


@app.get("/health", response_model=schemas.HealthResponse)
def health():
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/synth", response_model=schemas.SynthResponse)
def synth(req: schemas.SynthRequest):
    samples = make_dataset(req.n_per_weather, req.image_size, master_seed=req.seed)
    manifest = save_dataset(samples, req.out_dir, master_seed=req.seed)
    return schemas.SynthResponse(
        manifest_path=manifest,
        n_samples=len(samples),
        weathers=sorted({s.weather for s in samples}),
    )


@app.post("/train", response_model=schemas.TrainResponse)
def train_endpoint(req: schemas.TrainRequest):
    cfg = parse_config(req.config_text)
    model, log = train(cfg)
    report = log.evals[-1].report
    return schemas.TrainResponse(
        checkpoint_path=os.path.join(cfg.checkpoint_dir, "final.ckpt"),
        log_path=cfg.run_log_path(),
        steps=len(log.steps),
        final_loss=log.steps[-1].total if log.steps else float("nan"),
        metrics=_report_model(report),
    )


@app.post("/evaluate", response_model=schemas.EvalResponse)
def evaluate_endpoint(req: schemas.EvalRequest):
    model, _ = load_model(req.checkpoint_path)
    dataset = load_folder_dataset(req.data_dir)
    report = evaluate(model, dataset)
    report_path = None
    if req.report_path:
        report_path = report.save(req.report_path)
    return schemas.EvalResponse(metrics=_report_model(report), report_path=report_path)


@app.post("/infer", response_model=schemas.InferResponse)
def infer_endpoint(req: schemas.InferRequest):
    result = infer_file(req.checkpoint_path, req.input_path, req.output_path)
    return schemas.InferResponse(
        output_path=result["output_path"], height=result["height"], width=result["width"]
    )


@app.post("/ablate", response_model=schemas.AblateResponse)
def ablate_endpoint(req: schemas.AblateRequest):
    cfg = parse_config(req.config_text)
    rows = run_ablations(cfg)
    table_path = None
    if req.table_path:
        with open(req.table_path, "w") as out:
            out.write(rows_to_csv(rows))
        table_path = req.table_path
    return schemas.AblateResponse(
        rows=[
            schemas.AblationRowModel(
                name=r.name,
                params=r.params,
                psnr=r.psnr,
                ssim=r.ssim,
                reference_psnr=r.reference_psnr,
            )
            for r in rows
        ],
        table_path=table_path,
    )


def _nan_to_none(values):
    return [None if np.isnan(v) else float(v) for v in values]


@app.post("/analyze/amp-stats", response_model=schemas.AmpStatsResponse)
def amp_stats_endpoint(req: schemas.AmpStatsRequest):
    dataset = _dataset_from(req.data_dir, req.n_per_weather, req.image_size, req.seed)
    stats = analyze.amp_stats(dataset, bins=req.bins)
    out_path = None
    if req.out_path:
        with open(req.out_path, "w") as out:
            out.write(stats.to_csv())
        out_path = req.out_path
    return schemas.AmpStatsResponse(
        weathers=sorted(stats.mean),
        bins=stats.bins,
        radii=[float(r) for r in stats.radii],
        mean={w: _nan_to_none(stats.mean[w]) for w in stats.mean},
        std={w: _nan_to_none(stats.std[w]) for w in stats.std},
        out_path=out_path,
    )


@app.post("/analyze/amp-swap", response_model=schemas.AmpSwapResponse)
def amp_swap_endpoint(req: schemas.AmpSwapRequest):
    if req.input_path and req.gt_path:
        degraded = load_image(req.input_path)
        clean = load_image(req.gt_path)
    elif req.data_dir:
        dataset = load_folder_dataset(req.data_dir)
        if not 0 <= req.index < len(dataset):
            raise DataError(f"index {req.index} outside dataset of {len(dataset)} samples")
        sample = dataset[req.index]
        degraded, clean = sample.degraded, sample.clean
    else:
        raise ConfigError("amp-swap needs input_path+gt_path or data_dir")
    result = analyze.amp_swap(degraded, clean)
    paths = {}
    for name, image in result.images.items():
        paths[name] = save_image(os.path.join(req.out_dir, f"{name}.png"), image)
    return schemas.AmpSwapResponse(
        psnr_degraded=result.psnr_table["degraded"],
        psnr_clean_amplitude=result.psnr_table["clean_amplitude"],
        psnr_degraded_amplitude=result.psnr_table["degraded_amplitude"],
        image_paths=paths,
    )


@app.post("/analyze/features", response_model=schemas.FeaturesResponse)
def features_endpoint(req: schemas.FeaturesRequest):
    dataset = _dataset_from(req.data_dir, req.n_per_weather, req.image_size, req.seed)
    model = None
    if req.checkpoint_path:
        model, _ = load_model(req.checkpoint_path)
    dump = analyze.dump_features(model, dataset, req.layer, bins=req.bins)
    out_path = req.out_path if req.out_path.endswith(".npz") else req.out_path + ".npz"
    dump.save(out_path)
    return schemas.FeaturesResponse(
        out_path=out_path,
        n_rows=dump.features.shape[0],
        feature_dim=dump.features.shape[1],
        amplitude_dim=dump.amplitudes.shape[1],
        tags_seen=sorted(set(dump.tags)),
    )
