"""File-level inference: read a PNG, restore it, write the result."""

import os

import numpy as np

from ..checkpoint import load_model
from ..errors import DataError
from .evaluate import restore_image


def load_image(path):
    from PIL import Image

    if not os.path.exists(path):
        raise DataError(f"image not found: {path}")
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    except OSError as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    return arr


def save_image(path, image):
    from PIL import Image

    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    data = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data).save(path)
    return path


def infer_file(checkpoint_path, input_path, output_path):
    """Restore one image file with a trained checkpoint."""
    model, _ = load_model(checkpoint_path)
    image = load_image(input_path)
    restored = restore_image(model, image)
    save_image(output_path, restored)
    return {"output_path": output_path, "height": image.shape[0], "width": image.shape[1]}
