#!/usr/bin/env python3
"""Materialize the Middlebury 2014 Motorcycle pair bundled with scikit-image
as a dataset directory for the bench harness.

The pair ships at quarter resolution; we halve it again so the evaluation
suite stays affordable. Ground truth is written as PFM with 0 marking
unknown pixels, and the config carries flip_horizontal 1 because the stock
files use the left-reference x-d convention.

Usage: make_motorcycle_dataset.py <data_root>
Exit codes: 0 written (or already present), 77 scikit-image unavailable.
"""

import struct
import sys
from pathlib import Path


def write_pfm(path: Path, values, w: int, h: int) -> None:
    with open(path, "wb") as f:
        f.write(b"Pf\n%d %d\n-1.0\n" % (w, h))
        for y in range(h - 1, -1, -1):
            f.write(struct.pack("<%df" % w, *values[y]))


def main() -> int:
    if len(sys.argv) != 2:
        print("usage: make_motorcycle_dataset.py <data_root>", file=sys.stderr)
        return 2
    out_dir = Path(sys.argv[1]) / "motorcycle"
    if (out_dir / "dataset.cfg").exists():
        print(f"already present: {out_dir}")
        return 0

    try:
        import numpy as np
        from skimage import data
        from skimage.transform import resize
        import imageio.v2 as imageio  # noqa: F401  (probe)
    except ImportError:
        try:
            import numpy as np
            from skimage import data
            from skimage.io import imsave
            from skimage.transform import resize
        except ImportError:
            print("scikit-image unavailable; skipping motorcycle dataset", file=sys.stderr)
            return 77
    else:
        from skimage.io import imsave

    left, right, disp = data.stereo_motorcycle()
    h, w = disp.shape
    nh, nw = h // 2, w // 2

    def half(img):
        out = resize(img.astype(np.float64) / 255.0, (nh, nw, img.shape[2]),
                     order=1, anti_aliasing=True)
        return np.clip(np.round(out * 255.0), 0, 255).astype(np.uint8)

    left_h = half(left)
    right_h = half(right)

    # Nearest-subsample the disparity (averaging across depth edges would
    # fabricate values), halve it, keep unknowns at 0.
    disp_h = disp[::2, ::2][:nh, :nw].astype(np.float64) * 0.5
    disp_h[~np.isfinite(disp_h)] = 0.0
    disp_h[disp_h < 0.0] = 0.0

    dmax = int(np.ceil(disp_h.max())) + 2

    # Visibility from the GT itself: z-buffer the forward warp (these files
    # are left-reference, content moves to x - d) and keep pixels that win
    # their own target. Unknown GT stays outside nonocc.
    nonocc = np.zeros((nh, nw), dtype=np.uint8)
    known = disp_h > 0.0
    zbuf = np.full((nh, nw), -1.0)
    winner = np.full((nh, nw), -1, dtype=np.int64)
    for y in range(nh):
        for x in range(nw):
            if not known[y, x]:
                continue
            tx = int(round(x - disp_h[y, x]))
            if 0 <= tx < nw and disp_h[y, x] > zbuf[y, tx]:
                zbuf[y, tx] = disp_h[y, x]
                winner[y, tx] = y * nw + x
    for y in range(nh):
        for x in range(nw):
            if not known[y, x]:
                continue
            tx = int(round(x - disp_h[y, x]))
            if 0 <= tx < nw and winner[y, tx] == y * nw + x:
                nonocc[y, x] = 255

    out_dir.mkdir(parents=True, exist_ok=True)
    imsave(out_dir / "left.png", left_h)
    imsave(out_dir / "right.png", right_h)
    imsave(out_dir / "mask_nonocc.png", nonocc)
    write_pfm(out_dir / "gt.pfm", disp_h.astype(np.float32), nw, nh)
    (out_dir / "dataset.cfg").write_text(
        "name motorcycle\n"
        "left left.png\n"
        "right right.png\n"
        "gt gt.pfm\n"
        "gt_scale 1\n"
        f"dmax {dmax}\n"
        "mask_nonocc mask_nonocc.png\n"
        "flip_horizontal 1\n"
    )
    print(f"wrote {out_dir} ({nw}x{nh}, dmax {dmax})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
