"""Pydantic request/response models for the HTTP service."""

from typing import Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorResponse(BaseModel):
    error_code: str  # config_error | data_error | numeric_abort | internal_error
    detail: str


class SynthRequest(BaseModel):
    out_dir: str
    n_per_weather: int = Field(default=10, ge=1)
    image_size: int = Field(default=96, ge=16)
    seed: int = 0


class SynthResponse(BaseModel):
    manifest_path: str
    n_samples: int
    weathers: list[str]


class TrainRequest(BaseModel):
    config_text: str


class WeatherMetricsModel(BaseModel):
    psnr: float
    ssim: float
    baseline_psnr: float
    baseline_ssim: float
    count: int


class MetricsReportModel(BaseModel):
    weathers: dict[str, WeatherMetricsModel]
    config_hash: str


class TrainResponse(BaseModel):
    checkpoint_path: str
    log_path: str
    steps: int
    final_loss: float
    metrics: MetricsReportModel


class EvalRequest(BaseModel):
    checkpoint_path: str
    data_dir: str
    report_path: Optional[str] = None


class EvalResponse(BaseModel):
    metrics: MetricsReportModel
    report_path: Optional[str] = None


class InferRequest(BaseModel):
    checkpoint_path: str
    input_path: str
    output_path: str


class InferResponse(BaseModel):
    output_path: str
    height: int
    width: int


class AblateRequest(BaseModel):
    config_text: str
    table_path: Optional[str] = None


class AblationRowModel(BaseModel):
    name: str
    params: int
    psnr: float
    ssim: float
    reference_psnr: float


class AblateResponse(BaseModel):
    rows: list[AblationRowModel]
    table_path: Optional[str] = None


class AmpStatsRequest(BaseModel):
    data_dir: Optional[str] = None   # default: synthesize below
    n_per_weather: int = Field(default=100, ge=1)
    image_size: int = Field(default=96, ge=16)
    seed: int = 0
    bins: int = Field(default=64, ge=4)
    out_path: Optional[str] = None


class AmpStatsResponse(BaseModel):
    weathers: list[str]
    bins: int
    radii: list[float]
    mean: dict[str, list[Optional[float]]]
    std: dict[str, list[Optional[float]]]
    out_path: Optional[str] = None


class AmpSwapRequest(BaseModel):
    input_path: Optional[str] = None  # paired PNG files, or ...
    gt_path: Optional[str] = None
    data_dir: Optional[str] = None    # ... a dataset folder plus index
    index: int = 0
    out_dir: str


class AmpSwapResponse(BaseModel):
    psnr_degraded: float
    psnr_clean_amplitude: float
    psnr_degraded_amplitude: float
    image_paths: dict[str, str]


class FeaturesRequest(BaseModel):
    checkpoint_path: Optional[str] = None  # required for non-image layers
    data_dir: Optional[str] = None
    n_per_weather: int = Field(default=30, ge=1)
    image_size: int = Field(default=96, ge=16)
    seed: int = 0
    layer: str = "image"
    bins: int = Field(default=64, ge=4)
    out_path: str


class FeaturesResponse(BaseModel):
    out_path: str
    n_rows: int
    feature_dim: int
    amplitude_dim: int
    tags_seen: list[str]
