"""Regenerate the 144x144 grayscale PGM fixtures used by the test suite.

Source images are the public-domain / CC0 samples shipped with scikit-image.
Each one is center-cropped to a square, converted to gray by luminance and
downsampled with anti-aliasing.
"""
import pathlib

import numpy as np
from skimage import color, data, transform

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "data"
SIZE = 144
SOURCES = {
    "camera": data.camera,
    "astronaut": data.astronaut,
    "coffee": data.coffee,
    "chelsea": data.chelsea,
    "coins": data.coins,
}


def to_gray(img):
    if img.ndim == 3:
        img = color.rgb2gray(img[..., :3]) * 255.0
    return img.astype(np.float64)


def center_square(img):
    h, w = img.shape
    s = min(h, w)
    r0, c0 = (h - s) // 2, (w - s) // 2
    return img[r0:r0 + s, c0:c0 + s]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, loader in SOURCES.items():
        img = center_square(to_gray(loader()))
        small = transform.resize(img, (SIZE, SIZE), anti_aliasing=True, preserve_range=True)
        px = np.clip(np.round(small), 0, 255).astype(np.uint8)
        with open(OUT / f"{name}.pgm", "wb") as f:
            f.write(f"P5\n{SIZE} {SIZE}\n255\n".encode("ascii"))
            f.write(px.tobytes())
        print(name, px.mean(), px.std())


if __name__ == "__main__":
    main()
