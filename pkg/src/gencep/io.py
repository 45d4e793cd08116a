"""File formats for samples, moment tables, solver output and run configs.

Samples travel as CSV (index columns, then re/im) or as a shape-prefixed
little-endian binary; moment sets as CSV tables keyed by lag; solver input
as a single moments JSON document; solutions, models and factors as JSON.
All writers are deterministic given identical inputs.
"""

from __future__ import annotations

import csv
import json
import struct
import sys
import time
from typing import Optional

import numpy as np

from .cepstral import GenCepstralSet
from .dualopt import DualSolution, MomentData, TrigPoly
from .factorization import SpectralFactor
from .pipeline import CascadeModel
from .signal import SampleRecord
from .spectra import CovarianceSet

_BIN_MAGIC = b"GCEPSMP1"


def _fmt(x: float) -> str:
    return repr(float(x))


def write_samples_csv(record: SampleRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"i{j + 1}" for j in range(record.d)] + ["re", "im"])
        flat = record.data.reshape(-1)
        for idx, value in zip(np.ndindex(*record.shape), flat):
            writer.writerow([*idx, _fmt(value.real), _fmt(value.imag)])


def read_samples_csv(path) -> SampleRecord:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3 or header[-2:] != ["re", "im"]:
            raise ValueError(f"{path}: expected header i1,...,id,re,im")
        d = len(header) - 2
        entries = {}
        for row in reader:
            if not row:
                continue
            idx = tuple(int(v) for v in row[:d])
            entries[idx] = float(row[d]) + 1j * float(row[d + 1])
    if not entries:
        raise ValueError(f"{path}: no sample rows")
    shape = tuple(max(idx[j] for idx in entries) + 1 for j in range(d))
    if len(entries) != int(np.prod(shape)):
        raise ValueError(f"{path}: sample index set is not a full {shape} grid")
    data = np.empty(shape, dtype=np.complex128)
    for idx, value in entries.items():
        data[idx] = value
    is_real = bool(np.all(data.imag == 0.0))
    return SampleRecord(data.real if is_real else data, is_real=is_real)


def write_samples_bin(record: SampleRecord, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_BIN_MAGIC)
        fh.write(struct.pack("<q", record.d))
        fh.write(struct.pack(f"<{record.d}q", *record.shape))
        interleaved = np.empty(record.data.size * 2, dtype="<f8")
        flat = record.data.reshape(-1)
        interleaved[0::2] = flat.real
        interleaved[1::2] = flat.imag
        fh.write(interleaved.tobytes())


def read_samples_bin(path) -> SampleRecord:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(_BIN_MAGIC):
        raise ValueError(f"{path}: bad magic; not a binary sample file")
    off = len(_BIN_MAGIC)
    (d,) = struct.unpack_from("<q", blob, off)
    off += 8
    if d < 1 or d > 2:
        raise ValueError(f"{path}: unsupported dimension {d}")
    shape = struct.unpack_from(f"<{d}q", blob, off)
    off += 8 * d
    count = int(np.prod(shape))
    raw = np.frombuffer(blob, dtype="<f8", count=2 * count, offset=off)
    if raw.size != 2 * count:
        raise ValueError(f"{path}: truncated sample payload")
    data = (raw[0::2] + 1j * raw[1::2]).reshape(shape)
    is_real = bool(np.all(data.imag == 0.0))
    return SampleRecord(data.real if is_real else data, is_real=is_real)


def write_samples(record: SampleRecord, path) -> None:
    if str(path).endswith(".bin"):
        write_samples_bin(record, path)
    else:
        write_samples_csv(record, path)


def read_samples(path) -> SampleRecord:
    if str(path).endswith(".bin"):
        return read_samples_bin(path)
    return read_samples_csv(path)


def _write_lag_table(path, lag_values: list, d: int, extra_header=(), extra_row=()) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"k{j + 1}" for j in range(d)] + ["re", "im"] + list(extra_header))
        for lag, value in lag_values:
            writer.writerow([*lag, _fmt(value.real), _fmt(value.imag)] + list(extra_row))


def _read_lag_table(path, expected_extra: int = 0):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty table")
        d = 0
        while d < len(header) and header[d] == f"k{d + 1}":
            d += 1
        if d == 0 or len(header) < d + 2 or header[d] != "re" or header[d + 1] != "im":
            raise ValueError(f"{path}: expected header k1,...,kd,re,im")
        values = {}
        extras = []
        for row in reader:
            if not row:
                continue
            lag = tuple(int(v) for v in row[:d])
            values[lag] = float(row[d]) + 1j * float(row[d + 1])
            extras.append(row[d + 2 :])
    return d, values, extras


def write_covariances_csv(cov: CovarianceSet, path) -> None:
    _write_lag_table(path, [(lag, cov[lag]) for lag in cov.lags()], cov.d)


def read_covariances_csv(path) -> CovarianceSet:
    d, values, _ = _read_lag_table(path)
    return CovarianceSet(d, values)


def write_cepstra_csv(cep: GenCepstralSet, path) -> None:
    _write_lag_table(
        path,
        [(lag, cep[lag]) for lag in cep.lags()],
        cep.d,
        extra_header=("alpha", "corrected"),
        extra_row=(_fmt(cep.alpha), int(cep.corrected)),
    )


def read_cepstra_csv(path) -> GenCepstralSet:
    d, values, extras = _read_lag_table(path)
    tagged = [e for e in extras if len(e) >= 2]
    if not tagged:
        raise ValueError(f"{path}: missing alpha/corrected columns")
    alpha = float(tagged[0][0])
    corrected = bool(int(tagged[0][1]))
    return GenCepstralSet(alpha, d, values, corrected=corrected)


def _lag_entries(values_by_lag: dict) -> list:
    out = []
    for lag in sorted(values_by_lag):
        v = complex(values_by_lag[lag])
        out.append({"k": list(lag), "re": v.real, "im": v.imag})
    return out


def _entries_to_dict(entries: list) -> dict:
    return {tuple(e["k"]): complex(e["re"], e["im"]) for e in entries}


def write_moments_json(cov: CovarianceSet, cep: GenCepstralSet, nu: int, path) -> None:
    doc = {
        "format": "gencep-moments-1",
        "d": cov.d,
        "nu": int(nu),
        "alpha": cep.alpha,
        "corrected": bool(cep.corrected),
        "covariances": _lag_entries({lag: cov[lag] for lag in cov.lags()}),
        "cepstra": _lag_entries({lag: cep[lag] for lag in cep.lags()}),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_moments_json(path) -> MomentData:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "gencep-moments-1":
        raise ValueError(f"{path}: not a moments document")
    d = int(doc["d"])
    cov = CovarianceSet(d, _entries_to_dict(doc["covariances"]))
    cep = GenCepstralSet(
        float(doc["alpha"]), d, _entries_to_dict(doc["cepstra"]), corrected=bool(doc["corrected"])
    )
    return MomentData(cov, cep, int(doc["nu"]))


def _poly_doc(poly: TrigPoly) -> list:
    return _lag_entries({lag: poly[lag] for lag in poly.lags()})


def write_solution_json(solution: DualSolution, path) -> None:
    doc = {
        "format": "gencep-solution-1",
        "nu": solution.nu,
        "lam": solution.lam,
        "grid_shape": list(solution.grid_shape),
        "converged": bool(solution.converged),
        "iterations": int(solution.iterations),
        "grad_norm": solution.grad_norm,
        "objective": solution.objective,
        "real_coefficients": bool(solution.real_coefficients),
        "p": _poly_doc(solution.p),
        "q": _poly_doc(solution.q),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_solution_json(path) -> DualSolution:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "gencep-solution-1":
        raise ValueError(f"{path}: not a solution document")
    p_vals = _entries_to_dict(doc["p"])
    d = len(next(iter(p_vals)))
    return DualSolution(
        p=TrigPoly(d, p_vals),
        q=TrigPoly(d, _entries_to_dict(doc["q"])),
        nu=int(doc["nu"]),
        converged=bool(doc["converged"]),
        iterations=int(doc["iterations"]),
        grad_norm=float(doc["grad_norm"]),
        objective=float(doc["objective"]),
        lam=float(doc["lam"]),
        grid_shape=tuple(int(n) for n in doc["grid_shape"]),
        real_coefficients=bool(doc["real_coefficients"]),
        trace=np.empty((0, 4)),
    )


def write_trace_csv(solution: DualSolution, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective", "grad_norm", "step"])
        for row in solution.trace:
            writer.writerow([int(row[0]), _fmt(row[1]), _fmt(row[2]), _fmt(row[3])])


def _array_doc(arr: np.ndarray) -> dict:
    arr = np.asarray(arr, dtype=np.complex128)
    return {
        "shape": list(arr.shape),
        "re": arr.real.reshape(-1).tolist(),
        "im": arr.imag.reshape(-1).tolist(),
    }


def _doc_array(doc: dict) -> np.ndarray:
    shape = tuple(doc["shape"])
    re = np.asarray(doc["re"], dtype=np.float64).reshape(shape)
    im = np.asarray(doc["im"], dtype=np.float64).reshape(shape)
    if np.all(im == 0.0):
        return re
    return re + 1j * im


def write_model_json(model: CascadeModel, path, extras: Optional[dict] = None) -> None:
    doc = {
        "format": "gencep-model-1",
        "nu": model.nu,
        "d": model.d,
        "provenance": model.provenance,
        "b": _array_doc(model.b),
        "a": _array_doc(model.a),
    }
    if extras:
        doc["diagnostics"] = extras
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_model_json(path) -> CascadeModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "gencep-model-1":
        raise ValueError(f"{path}: not a model document")
    return CascadeModel(
        int(doc["nu"]), _doc_array(doc["b"]), _doc_array(doc["a"]), provenance=doc["provenance"]
    )


def write_factor_json(factor: SpectralFactor, path) -> None:
    doc = {
        "format": "gencep-factor-1",
        "method": factor.method,
        "residual": factor.residual,
        "coefficients": _array_doc(factor.coefficients),
        "diagnostics": factor.diagnostics,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table_csv(path, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def write_manifest(path, command: str, config: dict, elapsed: Optional[float] = None) -> None:
    doc = {
        "format": "gencep-manifest-1",
        "command": command,
        "config": {k: _jsonable(v) for k, v in sorted(config.items())},
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if elapsed is not None:
        doc["elapsed_seconds"] = round(float(elapsed), 3)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def read_run_file(path) -> dict:
    """Parse key = value lines; '#' starts a comment, commas make lists."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            if "," in value:
                out[key] = tuple(_parse_scalar(v.strip()) for v in value.split(",") if v.strip())
            else:
                out[key] = _parse_scalar(value)
    return out
