import csv
import io
import json
import os
import tempfile
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from loguru import logger

from src.errors import SnapshotFormatError
from src.objects.field import ScalarField, object_class
from src.objects.record import ConvergenceRecord, DiagnosticsRecord, format_float

SIDECAR_SUFFIX = ".json"


def write_atomic(path: str, data) -> str:
    """
    Write bytes or text to `path` through a temporary file in the same directory,
    then rename it into place.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as file:
            file.write(data)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug(f"Wrote {path}")
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    return write_atomic(path, csv_text(header, rows))


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline="") as file:
        return list(csv.DictReader(file))


def _json_default(obj):
    # numpy scalars and arrays that slipped into a summary
    if isinstance(obj, (np.generic, np.ndarray)):
        return obj.tolist()
    raise TypeError(f"Not JSON serializable: {type(obj).__name__}")


def dump_json(obj) -> str:
    # json writes floats with repr, which round-trips exactly
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_json(path: str, obj) -> str:
    return write_atomic(path, dump_json(obj))


def read_json(path: str):
    with open(path) as file:
        return json.load(file)


def write_records(path: str, records: Sequence) -> str:
    """CSV of DiagnosticsRecord or ConvergenceRecord rows; an empty list still gets a header."""
    record_class = type(records[0]) if records else ConvergenceRecord
    return write_csv(path, record_class.header(), (record.serialize() for record in records))


def read_records(path: str, record_class=ConvergenceRecord) -> List:
    return [record_class.deserialize(row) for row in read_csv(path)]


def write_diagnostics(path: str, records: Sequence[DiagnosticsRecord]) -> str:
    return write_csv(path, DiagnosticsRecord.header(), (record.serialize() for record in records))


def write_snapshot(path: str, field, t: float = None) -> Tuple[str, str]:
    """
    Binary snapshot plus a JSON sidecar at `path + ".json"` carrying the grid
    metadata the binary header does not hold.
    """
    write_atomic(path, field.serialize())
    sidecar = {
        "object_type": field.object_type,
        "N": field.N,
        "box_length": field.box_length,
        "t": t,
        "dtype": "float64",
        "byte_order": "little",
        "layout": "row-major, values[i, j] = f(x_i, y_j)",
    }
    write_json(path + SIDECAR_SUFFIX, sidecar)
    return path, path + SIDECAR_SUFFIX


def read_snapshot(path: str):
    """Returns (field, t) from a snapshot and its sidecar."""
    meta = read_json(path + SIDECAR_SUFFIX)
    with open(path, "rb") as file:
        data = file.read()
    field = object_class(meta["object_type"])(box_length=meta["box_length"], data=data)
    if field.N != meta["N"]:
        raise SnapshotFormatError(f"{path}: header N={field.N} but sidecar N={meta['N']}")
    return field, meta.get("t")


def write_plot_data(path: str, columns: Sequence[str], rows: Iterable[Sequence[float]], comment="") -> str:
    """Whitespace-separated columns with a '#' header, readable by gnuplot or numpy.loadtxt."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("# " + " ".join(columns))
    for row in rows:
        lines.append(" ".join(format_float(value) for value in row))
    return write_atomic(path, "\n".join(lines) + "\n")


def snapshot_name(label: str, t: float) -> str:
    return f"{label}_t{float(t)!r}.bin"


def write_run(directory: str, label: str, records: Sequence[DiagnosticsRecord], snapshots) -> List[str]:
    """Diagnostics CSV and every snapshot of a run under `directory`."""
    paths = [write_diagnostics(os.path.join(directory, f"{label}_diagnostics.csv"), records)]
    for t, field in snapshots:
        paths.append(write_snapshot(os.path.join(directory, snapshot_name(label, t)), field, t)[0])
    return paths


def load_field(path: str) -> ScalarField:
    field, _ = read_snapshot(path)
    return field
