"""Regenerate the committed test fixtures under data/.

Writes the three bundled sample scenes and a small randomly initialized
convolution weight file in the container format the library loads. The
weight bytes are assembled here with struct directly so the fixture does
not depend on the library's own serialization code.

Usage: python scripts/make_fixtures.py [root]
"""

import pathlib
import struct
import sys

import numpy as np

LAYERS = (
    ("conv1_1", 64, 3),
    ("conv1_2", 64, 64),
    ("conv2_1", 128, 64),
)
MEAN = (0.485, 0.456, 0.406)
STD = (0.229, 0.224, 0.225)


def write_weight_fixture(path, seed=123):
    rng = np.random.default_rng(seed)
    blob = bytearray()
    blob += b"VGGW"
    blob += struct.pack("<I", 1)
    blob += struct.pack("<12f", *MEAN, *STD, *(0.0,) * 6)
    blob += struct.pack("<I", len(LAYERS))
    for name, out_c, in_c in LAYERS:
        encoded = name.encode("ascii")
        blob += struct.pack("<I", len(encoded))
        blob += encoded
        blob += struct.pack("<4I", out_c, in_c, 3, 3)
        fan_in = in_c * 9
        kernel = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_c, in_c, 3, 3))
        bias = rng.normal(0.0, 0.02, size=out_c) + 0.02
        blob += kernel.astype("<f4").tobytes()
        blob += bias.astype("<f4").tobytes()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(bytes(blob))
    return path


def main(argv):
    root = pathlib.Path(argv[1]) if len(argv) > 1 else pathlib.Path(__file__).resolve().parent.parent
    from aerofuse.samples import make_bundled_scenes

    make_bundled_scenes(root / "data" / "scenes")
    weight_path = write_weight_fixture(root / "data" / "weights" / "fixture.vggw")
    print(f"wrote scenes under {root / 'data' / 'scenes'}")
    print(f"wrote {weight_path} ({weight_path.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
