"""Ablation runner: architecture switches and loss-weight combinations.

Seven variants are trained under identical seeds and budgets. Reference
PSNR values from the original study accompany each row for context; at
desk scale no ordering between rows is expected or asserted.
"""

import os
from dataclasses import dataclass

from ..network import count_params
from .config import with_overrides
from .train import train

# (name, config overrides, reference PSNR in dB)
VARIANTS = [
    ("model1-no-amplitude-guidance", {"amplitude_guidance": False}, 32.24),
    ("model2-no-mean-subtraction", {"subtract_mean_amplitude": False}, 32.42),
    ("model3-dense-content-only", {"spectral_content": False}, 32.39),
    ("full", {}, 32.57),
    ("loss-mae-fft", {"lambda_dm": 0.0}, 32.37),
    ("loss-mae-dm", {"lambda_fft": 0.0}, 32.34),
    ("loss-all", {}, 32.57),
]


@dataclass
class AblationRow:
    name: str
    params: int
    psnr: float
    ssim: float
    reference_psnr: float


def run_ablations(cfg, progress=None):
    """Train every variant of ``cfg`` and collect the comparison table."""
    rows = []
    for name, overrides, reference in VARIANTS:
        vcfg = with_overrides(
            cfg,
            checkpoint_dir=os.path.join(cfg.checkpoint_dir, name),
            log_path="",
            **overrides,
        )
        if progress is not None:
            progress(name)
        model, log = train(vcfg)
        report = log.evals[-1].report
        rows.append(
            AblationRow(
                name=name,
                params=count_params(model),
                psnr=report.mean_psnr(),
                ssim=report.mean_ssim(),
                reference_psnr=reference,
            )
        )
    return rows


def format_table(rows):
    header = f"{'variant':<30} {'params':>10} {'psnr':>8} {'ssim':>7} {'reference':>10}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row.name:<30} {row.params:>10d} {row.psnr:>8.2f} "
            f"{row.ssim:>7.4f} {row.reference_psnr:>10.2f}"
        )
    return "\n".join(lines)


def rows_to_csv(rows):
    lines = ["variant,params,psnr,ssim,reference_psnr"]
    for row in rows:
        lines.append(
            f"{row.name},{row.params},{row.psnr:.4f},{row.ssim:.4f},{row.reference_psnr:.2f}"
        )
    return "\n".join(lines) + "\n"
