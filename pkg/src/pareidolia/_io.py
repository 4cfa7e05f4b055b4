import io
import json
import os
import tempfile

import numpy as np
from PIL import Image


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to a temp file beside ``path``, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def netpbm_bytes(raster):
    """Binary PGM (2-D) or PPM (3-channel) bytes for an 8-bit raster."""
    a = np.asarray(raster)
    if a.dtype != np.uint8:
        raise ValueError("netpbm output needs an 8-bit raster")
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[:, :, 0]
    if a.ndim == 2:
        magic = b"P5"
    elif a.ndim == 3 and a.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"unsupported raster shape {a.shape}")
    header = magic + f"\n{a.shape[1]} {a.shape[0]}\n255\n".encode()
    return header + np.ascontiguousarray(a).tobytes()


def read_netpbm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    pos += 1
    magic, w, h = tokens[0], int(tokens[1]), int(tokens[2])
    shape = (h, w) if magic == b"P5" else (h, w, 3)
    return np.frombuffer(data[pos:pos + int(np.prod(shape))], dtype=np.uint8).reshape(shape)


def write_image(path, raster):
    """PGM/PPM written directly; any other extension goes through Pillow."""
    ext = os.path.splitext(os.fspath(path))[1].lower()
    if ext in (".pgm", ".ppm", ".pnm"):
        atomic_write(path, netpbm_bytes(raster))
        return
    a = np.asarray(raster)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[:, :, 0]
    buf = io.BytesIO()
    Image.fromarray(a).save(buf, format=Image.registered_extensions().get(ext, "PNG"))
    atomic_write(path, buf.getvalue())


def read_image(path):
    ext = os.path.splitext(os.fspath(path))[1].lower()
    if ext in (".pgm", ".ppm", ".pnm"):
        return read_netpbm(path)
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
