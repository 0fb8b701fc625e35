"""CSV/JSON emission with a reproducibility manifest.

Outputs are deterministic for a fixed configuration: keys are sorted, no
timestamps are embedded, and the manifest carries a sha256 per artifact so
that byte-identical reruns can be verified.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from fractions import Fraction

SCHEMA_VERSION = 1


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if hasattr(obj, "tolist"):  # numpy arrays and scalars
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def write_json(path, obj):
    doc = {"schema_version": SCHEMA_VERSION, "payload": _jsonable(obj)}
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return path


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema_version", SCHEMA_VERSION])
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(outdir, command, params, outputs):
    from . import __version__

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "params": _jsonable(params),
        "outputs": {
            os.path.basename(p): sha256_file(p) for p in sorted(outputs)
        },
    }
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return path
