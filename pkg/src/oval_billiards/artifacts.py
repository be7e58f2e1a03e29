"""CSV, graymap and report writers."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .analysis import BasinGrid, FateKind
from .config import fmt

# graymap shades: attracted to the curve is black, other periodic attractors white
SHADES = {
    FateKind.TO_CURVE: 0,
    FateKind.PERIODIC: 255,
    FateKind.ESCAPED: 128,
    FateKind.UNDECIDED: 128,
}


def write_rows(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if isinstance(x, float) else x for x in row])
    return path


def write_orbit_csv(path, record, F=None):
    header = ["step", "phi", "alpha", "lift"] + (["F"] if F is not None else [])
    phi, alpha = record.phi, record.alpha
    rows = []
    for k, (p, a, l) in enumerate(zip(phi, alpha, record.lift)):
        row = [k, float(p), float(a), float(l)]
        if F is not None:
            row.append(float(F(p, a)))
        rows.append(row)
    return write_rows(path, header, rows)


def write_basin_csv(path, grid: BasinGrid):
    rows = []
    for j, a in enumerate(grid.alpha):
        for i, p in enumerate(grid.phi):
            k = FateKind(int(grid.kinds[j, i]))
            per = int(grid.periods[j, i]) if k == FateKind.PERIODIC else 0
            rows.append([i, j, float(p), float(a), k.name, per, int(grid.iterations[j, i])])
    return write_rows(path, ["i", "j", "phi", "alpha", "fate", "period", "iters"], rows)


def basin_image(grid: BasinGrid) -> np.ndarray:
    """8-bit image with alpha increasing upward (row 0 is the largest alpha)."""
    img = np.full(grid.kinds.shape, 128, dtype=np.uint8)
    for kind, shade in SHADES.items():
        img[grid.kinds == kind] = shade
    return img[::-1]


def write_pgm(path, image: np.ndarray):
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w = image.shape
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(image.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError(f"not a binary graymap (magic {fields[0]!r})")
    w, h, maxval = (int(x) for x in fields[1:])
    if maxval > 255:
        raise ValueError("only 8-bit graymaps are supported")
    body = data[pos + 1:pos + 1 + w * h]
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w)


def write_certificate(txt_path, csv_path, cert):
    Path(txt_path).write_text("\n".join(cert.report_lines()) + "\n")
    rows = []
    if cert.grid is not None:
        P, S, mins = cert.grid
        rows = [[float(p), float(s), float(m)] for p, s, m in zip(P, S, mins)]
    write_rows(csv_path, ["phi", "alpha_offset", "min_entry"], rows)


def write_manifest(out_dir, files, config_lines):
    out_dir = Path(out_dir)
    lines = ["# files"] + [Path(f).name for f in files] + ["", "# config"] + list(config_lines)
    path = out_dir / "manifest.txt"
    path.write_text("\n".join(lines) + "\n")
    return path
