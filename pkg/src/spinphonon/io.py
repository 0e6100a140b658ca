"""Reproducible output files: provenance headers, CSV and JSON writers."""

import csv
import hashlib
import json
from pathlib import Path

from . import __version__

#: Config keys that must not influence output bytes.
_VOLATILE = {"jobs", "out"}


def config_hash(config):
    payload = {k: v for k, v in sorted(config.items()) if k not in _VOLATILE}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def file_digest(path):
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def provenance(schema, config, seed):
    return {
        "schema": schema,
        "tool_version": __version__,
        "seed": seed,
        "config_sha256": config_hash(config),
    }


def fmt(x):
    """17 significant digits: enough to round-trip any double."""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path, columns, rows, prov):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in prov.items()) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def read_csv(path):
    """Rows of a file written by :func:`write_csv` as dicts (values left as strings)."""
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_json(path, payload, prov):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = dict(payload)
    doc["provenance"] = prov
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path
