"""Minimal binary little-endian PLY reader/writer for xyz point clouds."""

from __future__ import annotations

from pathlib import Path

import numpy as np

_PROP_SIZES = {
    "char": 1, "int8": 1, "uchar": 1, "uint8": 1,
    "short": 2, "int16": 2, "ushort": 2, "uint16": 2,
    "int": 4, "int32": 4, "uint": 4, "uint32": 4,
    "float": 4, "float32": 4,
    "double": 8, "float64": 8,
}

_NP_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


class PlyError(ValueError):
    """Malformed PLY content; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def write_ply(path, points: np.ndarray) -> None:
    """Write an (N, 3) float cloud as binary little-endian PLY."""
    pts = np.asarray(points, dtype="<f4").reshape(-1, 3)
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {len(pts)}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "end_header\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(pts.tobytes())


def read_ply(path) -> np.ndarray:
    """Read xyz vertices from a binary little-endian PLY.

    Extra vertex properties are skipped; non-vertex elements after the
    vertex block are ignored.
    """
    raw = Path(path).read_bytes()
    if not raw.startswith(b"ply"):
        raise PlyError("missing 'ply' magic", 0)
    end = raw.find(b"end_header\n")
    if end < 0:
        raise PlyError("missing end_header", len(raw))
    body_off = end + len(b"end_header\n")
    header_lines = raw[:end].decode("ascii", errors="replace").splitlines()

    fmt = None
    vertex_count = None
    props: list[tuple[str, str]] = []
    in_vertex = False
    offset = 0
    for line in header_lines:
        tokens = line.strip().split()
        if not tokens:
            offset += len(line) + 1
            continue
        if tokens[0] == "format":
            fmt = tokens[1]
        elif tokens[0] == "element":
            in_vertex = tokens[1] == "vertex"
            if in_vertex:
                vertex_count = int(tokens[2])
        elif tokens[0] == "property" and in_vertex:
            if tokens[1] == "list":
                raise PlyError("list property on vertex element unsupported", offset)
            props.append((tokens[1], tokens[2]))
        offset += len(line) + 1
    if fmt != "binary_little_endian":
        raise PlyError(f"unsupported format {fmt!r}", 0)
    if vertex_count is None:
        raise PlyError("no vertex element", 0)
    for typ, _ in props:
        if typ not in _PROP_SIZES:
            raise PlyError(f"unknown property type {typ!r}", 0)
    names = [name for _, name in props]
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise PlyError(f"vertex element lacks property {axis!r}", 0)

    stride = sum(_PROP_SIZES[t] for t, _ in props)
    need = vertex_count * stride
    if len(raw) - body_off < need:
        raise PlyError(
            f"truncated vertex data: need {need} bytes, have {len(raw) - body_off}",
            len(raw),
        )
    dtype = np.dtype([(name, "<" + _NP_TYPES[typ]) for typ, name in props])
    rec = np.frombuffer(raw, dtype=dtype, count=vertex_count, offset=body_off)
    out = np.empty((vertex_count, 3), dtype=float)
    for k, axis in enumerate(("x", "y", "z")):
        out[:, k] = rec[axis].astype(float)
    return out
