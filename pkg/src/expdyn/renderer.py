# -*- coding: utf-8 -*-
"""
Renderer - parameter-plane pictures as binary PPM.

Each pixel center is classified with the cycle certifier and colored by
verdict; hyperbolic pixels cycle through the palette by period.
"""
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .certifier import CycleCertifier
from .config import ExpDynConfig, get_config
from .console import say
from .data_models import RGB, Classification, RenderSpec, Verdict
from .exceptions import ReportError


def ppm_header(width: int, height: int) -> bytes:
    return f"P6\n{width} {height}\n255\n".encode("ascii")


def pixel_parameter(spec: RenderSpec, col: int, row: int) -> complex:
    """Parameter at the center of pixel (col, row); row 0 is the top edge."""
    x0, y0, x1, y1 = spec.rect
    width, height = spec.px
    return complex(x0 + (col + 0.5) * (x1 - x0) / width, y1 - (row + 0.5) * (y1 - y0) / height)


def verdict_color(spec: RenderSpec, result: Optional[Classification]) -> RGB:
    """Palette entry for a classification; None (lambda = 0) is drawn as undecided."""
    palette = spec.palette
    if result is None or result.verdict is Verdict.UNDECIDED:
        return tuple(palette["Undecided"])
    if result.verdict is Verdict.ESCAPE_SUSPECT:
        return tuple(palette["EscapeSuspect"])
    colors = palette["Hyperbolic"]
    return tuple(colors[(result.period - 1) % len(colors)])


def _classify_rows(config: ExpDynConfig, spec: RenderSpec,
                   rows: Sequence[int]) -> List[List[Optional[Classification]]]:
    certifier = CycleCertifier(config)
    width = spec.px[0]
    out = []
    for row in rows:
        line = []
        for col in range(width):
            lam = pixel_parameter(spec, col, row)
            line.append(certifier.classify(lam) if lam != 0 else None)
        out.append(line)
    return out


class ParameterPlaneRenderer:
    """Classifies a pixel grid of parameters and encodes it as PPM."""

    def __init__(self, config: Optional[ExpDynConfig] = None, n_jobs: Optional[int] = None):
        self.config = config or get_config()
        self.n_jobs = self.config.runtime.n_jobs if n_jobs is None else n_jobs

    def classify_grid(self, spec: RenderSpec) -> List[List[Optional[Classification]]]:
        height = spec.px[1]
        rows = list(range(height))
        jobs = max(1, self.n_jobs)
        if jobs == 1 or height < 2:
            return _classify_rows(self.config, spec, rows)
        size = -(-height // jobs)
        chunks = [rows[i:i + size] for i in range(0, height, size)]
        parts = Parallel(n_jobs=jobs)(delayed(_classify_rows)(self.config, spec, chunk) for chunk in chunks)
        return [line for part in parts for line in part]

    def render(self, spec: RenderSpec) -> bytes:
        """PPM bytes (P6, maxval 255)."""
        width, height = spec.px
        say(f"🖼️ Rendering {width}x{height} over {spec.rect}", self.config)
        grid = self.classify_grid(spec)
        pixels = np.zeros((height, width, 3), dtype=np.uint8)
        for row, line in enumerate(grid):
            for col, result in enumerate(line):
                pixels[row, col] = verdict_color(spec, result)
        say(f"✅ Rendered {width * height} pixels", self.config)
        return ppm_header(width, height) + pixels.tobytes()

    def write(self, spec: RenderSpec, path: str) -> None:
        data = self.render(spec)
        try:
            target = Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
        except OSError as exc:
            raise ReportError(f"cannot write {path}: {exc}") from exc


def render_parameter_plane(config: ExpDynConfig, spec: RenderSpec) -> bytes:
    return ParameterPlaneRenderer(config).render(spec)
