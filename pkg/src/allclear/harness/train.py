"""Adam training loop with cosine-annealed learning rate and resumable state."""

import json
import logging
import math
import os
import statistics
from collections import deque
from dataclasses import asdict, dataclass, field

import torch

from ..checkpoint import load_checkpoint, load_into, restore_optimizer, save_checkpoint
from ..errors import ConfigError, NumericAbort, ShapeError
from ..losses import dm_loss, fft_loss, mae_loss
from ..metrics import MetricsReport
from ..network import build_model
from ..synthdata import derive_seed, load_folder_dataset, make_dataset, sample_batch
from .evaluate import evaluate

logger = logging.getLogger("allclear.train")

ADAM_BETAS = (0.9, 0.999)
SPIKE_FACTOR = 100.0


@dataclass
class StepRecord:
    step: int
    total: float
    mae: float
    fft: float
    dm: float
    lr: float


@dataclass
class EvalRecord:
    step: int
    report: MetricsReport


@dataclass
class RunLog:
    steps: list = field(default_factory=list)
    evals: list = field(default_factory=list)

    def append_step(self, record):
        if self.steps and record.step <= self.steps[-1].step:
            raise ValueError(
                f"run log steps must increase: {record.step} after {self.steps[-1].step}"
            )
        self.steps.append(record)

    def to_dict(self):
        return {
            "steps": [asdict(s) for s in self.steps],
            "evals": [{"step": e.step, "report": e.report.to_dict()} for e in self.evals],
        }

    @classmethod
    def from_dict(cls, data):
        log = cls(steps=[StepRecord(**s) for s in data["steps"]])
        log.evals = [
            EvalRecord(step=e["step"], report=MetricsReport.from_dict(e["report"]))
            for e in data["evals"]
        ]
        return log

    def save(self, path):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as out:
            json.dump(self.to_dict(), out)
        return path

    @classmethod
    def load(cls, path):
        with open(path) as handle:
            return cls.from_dict(json.load(handle))


def lr_at(step, cfg):
    """Cosine annealing from lr_start at step 0 to lr_end at total_steps."""
    if not 0 <= step <= cfg.total_steps:
        raise ConfigError(f"step {step} outside [0, {cfg.total_steps}]")
    span = cfg.lr_start - cfg.lr_end
    return cfg.lr_end + 0.5 * span * (1.0 + math.cos(math.pi * step / cfg.total_steps))


def build_training_data(cfg):
    """(train, test) datasets: folder-backed when configured, else synthetic."""
    params = cfg.degrade_params()
    if cfg.train_data:
        train = load_folder_dataset(cfg.train_data)
    else:
        train = make_dataset(
            cfg.train_per_weather, cfg.image_size, params,
            derive_seed(cfg.master_seed, "train-data"),
        )
    if cfg.test_data:
        test = load_folder_dataset(cfg.test_data)
    else:
        test = make_dataset(
            cfg.test_per_weather, cfg.image_size, params,
            derive_seed(cfg.master_seed, "test-data"),
        )
    return train, test


def _np_batch_to_tensors(inp_np, gt_np):
    inp = torch.from_numpy(inp_np).permute(0, 3, 1, 2).contiguous()
    gt = torch.from_numpy(gt_np).permute(0, 3, 1, 2).contiguous()
    return inp, gt


def train(cfg, progress=None, datasets=None):
    """Run the configured training; returns (model, RunLog).

    All randomness (data synthesis, batch sampling, weight init) derives
    from cfg.master_seed, so repeated runs reproduce the same loss curve.
    ``datasets`` may inject prebuilt (train, test) lists to skip synthesis.
    ``progress`` is called with each StepRecord.
    """
    cfg.validate()
    train_ds, test_ds = datasets if datasets is not None else build_training_data(cfg)

    torch.manual_seed(derive_seed(cfg.master_seed, "init") % 2 ** 63)
    model = build_model(cfg.net_config())
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr_start, betas=ADAM_BETAS)

    start_step = 0
    if cfg.resume:
        ckpt = load_checkpoint(cfg.resume)
        load_into(model, ckpt)
        restore_optimizer(optimizer, model, ckpt)
        start_step = ckpt.step
        if start_step >= cfg.total_steps:
            raise ConfigError(
                f"resume checkpoint is at step {start_step}, total_steps is {cfg.total_steps}"
            )
        logger.info("resumed from %s at step %d", cfg.resume, start_step)

    weights = cfg.loss_weights()
    log = RunLog()
    recent = deque(maxlen=101)

    for step in range(start_step, cfg.total_steps):
        lr = lr_at(step, cfg)
        for group in optimizer.param_groups:
            group["lr"] = lr
        batch_seed = derive_seed(cfg.master_seed, "batch", step)
        inp_np, gt_np, _ = sample_batch(train_ds, cfg.batch_size, cfg.patch_size, batch_seed)
        inp, gt = _np_batch_to_tensors(inp_np, gt_np)

        try:
            out = model(inp)
            mae = mae_loss(out, gt)
            fft = fft_loss(out, gt)
            dm = dm_loss(inp, out, gt)
        except ShapeError:
            raise
        except ValueError as exc:
            # non-finite activations surface as spectral-input rejections
            raise NumericAbort(
                f"numeric failure at step {step} (batch seed {batch_seed}): {exc}",
                step=step,
                batch_seed=batch_seed,
            ) from exc
        total = weights.mae * mae + weights.fft * fft + weights.dm * dm
        if not torch.isfinite(total):
            raise NumericAbort(
                f"non-finite loss at step {step} (batch seed {batch_seed})",
                step=step,
                batch_seed=batch_seed,
            )
        total_value = total.item()
        if len(recent) >= 10 and total_value > SPIKE_FACTOR * statistics.median(recent):
            logger.warning("loss spike at step %d: %.4g", step, total_value)
        recent.append(total_value)

        optimizer.zero_grad()
        total.backward()
        optimizer.step()

        record = StepRecord(step, total_value, mae.item(), fft.item(), dm.item(), lr)
        log.append_step(record)
        if progress is not None:
            progress(record)

        done = step + 1
        if cfg.eval_interval and done % cfg.eval_interval == 0 and done < cfg.total_steps:
            log.evals.append(EvalRecord(done, evaluate(model, test_ds)))
            save_checkpoint(
                os.path.join(cfg.checkpoint_dir, f"step{done:06d}.ckpt"),
                model, step=done, seed=cfg.master_seed, optimizer=optimizer,
            )

    report = evaluate(model, test_ds)
    log.evals.append(EvalRecord(cfg.total_steps, report))
    save_checkpoint(
        os.path.join(cfg.checkpoint_dir, "final.ckpt"),
        model, step=cfg.total_steps, seed=cfg.master_seed, optimizer=optimizer,
    )
    log.save(cfg.run_log_path())
    return model, log
