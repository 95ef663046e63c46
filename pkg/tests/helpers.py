"""Independent reference implementations and fixture builders for the tests.

Everything in here deliberately avoids the library's own code paths: the
weight container is assembled with struct, the screened-smoothing system is
solved with a dense matrix, the network forward pass is a literal triple
loop, and mutual information is a literal double loop over histogram bins.
These exist so library results can be checked against slow-but-obvious
arithmetic rather than against themselves.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

VGG_LAYER_SPECS = (
    ("conv1_1", 64, 3),
    ("conv1_2", 64, 64),
    ("conv2_1", 128, 64),
)
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


def random_layer_arrays(seed: int = 123) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """He-initialised kernels and small positive-biased biases, as float32."""
    rng = np.random.default_rng(seed)
    layers = []
    for name, out_c, in_c in VGG_LAYER_SPECS:
        fan_in = in_c * 9
        kernel = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_c, in_c, 3, 3))
        bias = rng.normal(0.0, 0.02, size=out_c) + 0.02
        layers.append((name, kernel.astype(np.float32), bias.astype(np.float32)))
    return layers


def build_vggw_bytes(
    layers: list[tuple[str, np.ndarray, np.ndarray]],
    mean=IMAGENET_MEAN,
    std=IMAGENET_STD,
    magic: bytes = b"VGGW",
    version: int = 1,
) -> bytes:
    blob = bytearray()
    blob += magic
    blob += struct.pack("<I", version)
    blob += struct.pack("<12f", *mean, *std, *(0.0,) * 6)
    blob += struct.pack("<I", len(layers))
    for name, kernel, bias in layers:
        encoded = name.encode("ascii")
        blob += struct.pack("<I", len(encoded))
        blob += encoded
        blob += struct.pack("<4I", *kernel.shape)
        blob += np.ascontiguousarray(kernel, dtype="<f4").tobytes()
        blob += np.ascontiguousarray(bias, dtype="<f4").tobytes()
    return bytes(blob)


def write_vggw(path, layers=None, **kwargs) -> None:
    if layers is None:
        layers = random_layer_arrays()
    with open(path, "wb") as fh:
        fh.write(build_vggw_bytes(layers, **kwargs))


# -- dense reference for the screened smoothing system ----------------------

def _difference_matrices(h: int, w: int, periodic: bool) -> tuple[np.ndarray, np.ndarray]:
    """Forward-difference operators on the flattened h*w grid as dense rows."""
    n = h * w

    def idx(i, j):
        return i * w + j

    gx = np.zeros((n, n))
    gy = np.zeros((n, n))
    for i in range(h):
        for j in range(w):
            r = idx(i, j)
            if j + 1 < w:
                gx[r, idx(i, j + 1)] += 1.0
                gx[r, idx(i, j)] -= 1.0
            elif periodic:
                gx[r, idx(i, 0)] += 1.0
                gx[r, idx(i, j)] -= 1.0
            if i + 1 < h:
                gy[r, idx(i + 1, j)] += 1.0
                gy[r, idx(i, j)] -= 1.0
            elif periodic:
                gy[r, idx(0, j)] += 1.0
                gy[r, idx(i, j)] -= 1.0
    return gx, gy


def dense_smooth(f: np.ndarray, lam: float, periodic: bool) -> np.ndarray:
    """Solve (I + lam*(Gx^T Gx + Gy^T Gy)) L = f with a dense direct solve."""
    h, w = f.shape
    gx, gy = _difference_matrices(h, w, periodic)
    a = np.eye(h * w) + lam * (gx.T @ gx + gy.T @ gy)
    return np.linalg.solve(a, f.reshape(-1)).reshape(h, w)


# -- naive network forward ---------------------------------------------------

def _naive_conv3x3(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Literal triple loop over output channel and spatial position."""
    c, h, w = x.shape
    out_c = kernel.shape[0]
    xp = np.zeros((c, h + 2, w + 2))
    xp[:, 1:-1, 1:-1] = x
    k64 = kernel.astype(np.float64)
    out = np.zeros((out_c, h, w))
    for o in range(out_c):
        for i in range(h):
            for j in range(w):
                patch = xp[:, i:i + 3, j:j + 3]
                out[o, i, j] = float(np.sum(patch * k64[o])) + float(bias[o])
    return out


def naive_forward(arr: np.ndarray, layers, mean, std) -> tuple[np.ndarray, np.ndarray]:
    """Reference path: normalize, conv1_1+relu, conv1_2+relu, pool, conv2_1+relu."""
    by_name = {name: (k, b) for name, k, b in layers}
    x = (arr - np.asarray(mean)[:, None, None]) / np.asarray(std)[:, None, None]
    phi1 = np.maximum(_naive_conv3x3(x, *by_name["conv1_1"]), 0.0)
    t = np.maximum(_naive_conv3x3(phi1, *by_name["conv1_2"]), 0.0)
    c, h, w = t.shape
    pooled = t[:, : h // 2 * 2, : w // 2 * 2].reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))
    phi2 = np.maximum(_naive_conv3x3(pooled, *by_name["conv2_1"]), 0.0)
    return phi1, phi2


# -- brute-force metrics ------------------------------------------------------

def brute_force_mi(a_codes: np.ndarray, b_codes: np.ndarray, bins: int = 256) -> float:
    """Joint-histogram mutual information in bits, written as explicit loops
    over the occupied bins."""
    joint = np.zeros((bins, bins))
    for x, y in zip(a_codes.reshape(-1), b_codes.reshape(-1)):
        joint[int(x), int(y)] += 1.0
    joint /= joint.sum()
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    total = 0.0
    for i in range(bins):
        for j in range(bins):
            p = joint[i, j]
            if p > 0.0:
                total += p * np.log2(p / (pa[i] * pb[j]))
    return float(total)


def entropy_bits(codes: np.ndarray, bins: int = 256) -> float:
    counts = np.bincount(codes.reshape(-1).astype(np.int64), minlength=bins)
    p = counts / counts.sum()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
