"""Build the HandWritten (UCI Multiple Features) dataset directory.

The six feature files ship inside the ``mvlearn`` wheel. This script pulls
the wheel with pip, extracts the CSVs and writes headerless per-view CSVs,
a labels file and a manifest in the layout ``aimc.io.load_dataset`` reads.

    python scripts/prepare_handwritten.py data/handwritten
"""

import argparse
import io
import json
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np

# Manifest order: profile correlations, Fourier, Karhunen-Loeve, morphological,
# pixel averages, Zernike.
VIEWS = [
    ("fac", 216),
    ("fou", 76),
    ("kar", 64),
    ("mor", 6),
    ("pix", 240),
    ("zer", 47),
]


def fetch_wheel(workdir):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "mvlearn==0.5.0", "--no-deps",
         "-d", str(workdir)],
        check=True,
    )
    return next(Path(workdir).glob("mvlearn-*.whl"))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", type=Path)
    parser.add_argument("--wheel", type=Path, default=None)
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(tmp)
        zf = zipfile.ZipFile(wheel)
        labels = None
        entries = []
        for name, dim in VIEWS:
            raw = zf.read(f"mvlearn/datasets/UCImultifeature/mfeat-{name}.csv")
            table = np.genfromtxt(io.BytesIO(raw), delimiter=",", skip_header=1)
            feats, lab = table[:, :-1], table[:, -1].astype(int)
            assert feats.shape == (2000, dim), (name, feats.shape)
            if labels is None:
                labels = lab
            assert np.array_equal(labels, lab)
            path = f"{name}.csv"
            np.savetxt(args.out / path, feats, delimiter=",", fmt="%.10g")
            entries.append({"name": name, "path": path, "dim": dim, "format": "csv"})

    np.savetxt(args.out / "labels.txt", labels, fmt="%d")
    manifest = {"name": "HandWritten", "n": 2000, "k": 10, "views": entries,
                "labels_path": "labels.txt"}
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
