"""Problem files, result records, and CSV emission.

JSON carries structured inputs and outputs, CSV carries array and plot data.
Numbers are serialized with 17 significant digits so every round trip is
lossless, and the writer emits keys in insertion order with fixed layout, so
rerunning a command on identical input produces byte-identical files.

Conventions: covariance and cepstral sequences are lists of [re, im] pairs
(bare numbers are accepted on input and read as real); symbols are flat real
arrays [p_0, re p_1, im p_1, ...] of odd length.  Every file carries a
"version" field.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .circulant import SymmetricPseudoPolynomial, eval_symbol
from .dual import SolverOptions
from .grid import DiscreteGrid, SpectrumSamples
from .moments import CepstralSequence, CovarianceSequence

FORMAT_VERSION = 1
ARTIFACT_VERSION = "0.1.0"

PROBLEM_KEYS = {"version", "N", "c", "m", "p", "options", "lambda"}
OPTION_KEYS = {"grad_tol", "max_iter", "boundary_floor", "backtrack_ratio"}


class InputFormatError(ValueError):
    """A problem or model file violates the documented schema."""


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def _emit(obj, indent: int = 0) -> str:
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(key))}: {_emit(value, indent + 2)}"
            for key, value in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in seq)
        if flat and len(seq) <= 4:
            return "[" + ", ".join(_emit(x) for x in seq) + "]"
        items = [f"{inner}{_emit(x, indent + 2)}" for x in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_emit(obj))
        fh.write("\n")


def load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InputFormatError(f"{path}: expected a JSON object at top level")
    return data


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


def complex_pairs(values: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex)]


def parse_complex_list(raw, name: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise InputFormatError(f'field "{name}" must be a nonempty array')
    out = np.empty(len(raw), dtype=complex)
    for i, entry in enumerate(raw):
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            out[i] = float(entry)
        elif (
            isinstance(entry, list)
            and len(entry) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            out[i] = complex(float(entry[0]), float(entry[1]))
        else:
            raise InputFormatError(
                f'field "{name}"[{i}] must be a number or an [re, im] pair'
            )
    return out


def _flat_real(values) -> list:
    co = np.asarray(values, dtype=complex)
    out = [float(co[0].real)]
    for z in co[1:]:
        out += [float(z.real), float(z.imag)]
    return out


def symbol_to_json(p: SymmetricPseudoPolynomial) -> list:
    """Flat real array [p_0, re p_1, im p_1, ...]."""
    return _flat_real(p.coeffs)


def symbol_from_json(raw, name: str) -> SymmetricPseudoPolynomial:
    if (
        not isinstance(raw, list)
        or not raw
        or len(raw) % 2 == 0
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in raw)
    ):
        raise InputFormatError(
            f'field "{name}" must be a flat numeric array [p0, re p1, im p1, ...] '
            "of odd length"
        )
    n = (len(raw) - 1) // 2
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = float(raw[0])
    for k in range(1, n + 1):
        coeffs[k] = complex(float(raw[2 * k - 1]), float(raw[2 * k]))
    try:
        return SymmetricPseudoPolynomial(coeffs)
    except ValueError as exc:
        raise InputFormatError(f'field "{name}": {exc}') from exc


@dataclass
class ProblemSpec:
    """Validated content of a problem file."""

    grid: DiscreteGrid
    c: CovarianceSequence
    m: CepstralSequence | None
    p: SymmetricPseudoPolynomial | None
    options: SolverOptions
    regularization: float | None
    warnings: list[str]


def problem_from_dict(data: dict, source: str = "problem") -> ProblemSpec:
    warnings = [
        f'{source}: ignoring unknown field "{key}"'
        for key in data
        if key not in PROBLEM_KEYS
    ]
    version = data.get("version")
    if version is None:
        warnings.append(f'{source}: missing "version" field, assuming {FORMAT_VERSION}')
    elif version != FORMAT_VERSION:
        raise InputFormatError(f"{source}: unsupported version {version!r}")
    if "N" not in data:
        raise InputFormatError(f'{source}: missing required field "N"')
    N = data["N"]
    if isinstance(N, bool) or not isinstance(N, int):
        raise InputFormatError(f'{source}: field "N" must be an integer')
    try:
        grid = DiscreteGrid(N)
    except ValueError as exc:
        raise InputFormatError(f"{source}: {exc}") from exc
    if "c" not in data:
        raise InputFormatError(
            f'{source}: missing required field "c" '
            "(covariance sequence as [re, im] pairs)"
        )
    try:
        c = CovarianceSequence(parse_complex_list(data["c"], "c"))
    except ValueError as exc:
        raise InputFormatError(f"{source}: {exc}") from exc

    m = None
    if "m" in data:
        try:
            m = CepstralSequence(parse_complex_list(data["m"], "m"))
        except ValueError as exc:
            raise InputFormatError(f"{source}: {exc}") from exc

    p = symbol_from_json(data["p"], "p") if "p" in data else None

    opts_kwargs = {}
    raw_opts = data.get("options", {})
    if not isinstance(raw_opts, dict):
        raise InputFormatError(f'{source}: field "options" must be an object')
    for key, value in raw_opts.items():
        if key not in OPTION_KEYS:
            warnings.append(f'{source}: ignoring unknown option "{key}"')
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InputFormatError(f'{source}: option "{key}" must be a number')
        opts_kwargs[key] = int(value) if key == "max_iter" else float(value)
    try:
        options = SolverOptions(**opts_kwargs)
    except ValueError as exc:
        raise InputFormatError(f"{source}: {exc}") from exc

    regularization = None
    if "lambda" in data:
        lam = data["lambda"]
        if isinstance(lam, bool) or not isinstance(lam, (int, float)) or lam < 0:
            raise InputFormatError(f'{source}: field "lambda" must be a number >= 0')
        regularization = float(lam)
    return ProblemSpec(grid, c, m, p, options, regularization, warnings)


def load_problem(path: str) -> ProblemSpec:
    return problem_from_dict(load_json(path), source=path)


def solution_to_dict(report) -> dict:
    """JSON payload for a covariance matching report."""
    return {
        "version": FORMAT_VERSION,
        "kind": "solution",
        "N": report.grid.N,
        "n": report.c.n,
        "c": complex_pairs(report.c.c),
        "p": symbol_to_json(report.p),
        "q": symbol_to_json(report.q),
        "extended_c": complex_pairs(report.extended_c),
        "residual": report.residual,
        "iterations": report.iterations,
    }


def joint_to_dict(report) -> dict:
    """JSON payload for a joint covariance and cepstral report."""
    out = {
        "version": FORMAT_VERSION,
        "kind": "joint",
        "N": report.grid.N,
        "n": report.c.n,
        "c": complex_pairs(report.c.c),
        "m": complex_pairs(report.m.m),
        "lambda": report.regularization,
        "p": symbol_to_json(report.p),
        "q": symbol_to_json(report.q),
        "covariance_residual": report.covariance_residual,
        "cepstral_residual": report.cepstral_residual,
        "boundary_flag": report.boundary_flag,
        "iterations": report.iterations,
    }
    if report.epsilon is not None:
        out["epsilon"] = complex_pairs(report.epsilon)
    return out


def load_model(path: str) -> tuple[DiscreteGrid, SymmetricPseudoPolynomial, SymmetricPseudoPolynomial]:
    """Read a spectrum model P/Q from a solution file or a hand-written one.

    Requires fields "N", "p", "q"; solution files written by the solvers
    qualify, closing the solve -> simulate loop.
    """
    data = load_json(path)
    for key in ("N", "p", "q"):
        if key not in data:
            raise InputFormatError(f'{path}: model needs field "{key}"')
    N = data["N"]
    if isinstance(N, bool) or not isinstance(N, int):
        raise InputFormatError(f'{path}: field "N" must be an integer')
    grid = DiscreteGrid(N)
    p = symbol_from_json(data["p"], "p")
    q = symbol_from_json(data["q"], "q")
    return grid, p, q


def model_spectrum(grid, p, q) -> SpectrumSamples:
    """Node samples of P/Q with positivity checks on both symbols."""
    pv = eval_symbol(p, grid).real_values()
    qv = eval_symbol(q, grid).real_values()
    for name, vals in (("numerator", pv), ("denominator", qv)):
        if name == "denominator" and vals.min() <= 0.0:
            j = int(grid.indices[int(np.argmin(vals))])
            raise InputFormatError(f"model {name} is not positive at node j={j}")
        if name == "numerator" and vals.min() < 0.0:
            j = int(grid.indices[int(np.argmin(vals))])
            raise InputFormatError(f"model {name} is negative at node j={j}")
    return SpectrumSamples(grid, pv / qv)


def write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_cell(x) for x in row) + "\n")


def _cell(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format_float(x)


def write_spectrum_csv(path: str, phi: SpectrumSamples) -> None:
    vals = phi.real_values()
    write_csv(
        path, "theta,phi", zip(phi.grid.angles, vals)
    )


def write_extended_csv(path: str, extended_c: np.ndarray) -> None:
    rows = [(k, z.real, z.imag) for k, z in enumerate(np.asarray(extended_c))]
    write_csv(path, "k,re,im", rows)


def write_realization_csv(path: str, y: np.ndarray) -> None:
    arr = np.asarray(y, dtype=complex)
    rows = [(t, z.real, z.imag) for t, z in enumerate(arr)]
    write_csv(path, "t,re,im", rows)


def read_realization_csv(path: str, grid: DiscreteGrid) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3 or data.shape[0] != grid.size:
        raise InputFormatError(
            f"{path}: expected {grid.size} rows of t,re,im"
        )
    return data[:, 1] + 1j * data[:, 2]


def write_ensemble(out_dir: str, realizations: np.ndarray, grid, seed, model_hash, real_valued) -> list[str]:
    """Write one CSV per realization plus a manifest; returns the file names."""
    names = []
    for r, row in enumerate(realizations):
        name = f"realization_{r:04d}.csv"
        write_realization_csv(os.path.join(out_dir, name), row)
        names.append(name)
    manifest = {
        "version": FORMAT_VERSION,
        "kind": "ensemble",
        "N": grid.N,
        "count": int(realizations.shape[0]),
        "seed": seed,
        "real_valued": bool(real_valued),
        "model_sha256": model_hash,
        "files": names,
    }
    dump_json(manifest, os.path.join(out_dir, "manifest.json"))
    return names


def read_ensemble(dir_path: str) -> tuple[np.ndarray, DiscreteGrid, dict]:
    manifest_path = os.path.join(dir_path, "manifest.json")
    if not os.path.exists(manifest_path):
        raise InputFormatError(f"{dir_path}: no manifest.json found")
    manifest = load_json(manifest_path)
    for key in ("N", "files"):
        if key not in manifest:
            raise InputFormatError(f'{manifest_path}: missing field "{key}"')
    grid = DiscreteGrid(manifest["N"])
    rows = [
        read_realization_csv(os.path.join(dir_path, name), grid)
        for name in manifest["files"]
    ]
    if not rows:
        raise InputFormatError(f"{dir_path}: ensemble holds no realizations")
    return np.stack(rows), grid, manifest


def run_record(command: str, input_sha256: str, wall_clock_ms: float, outputs: list[str]) -> dict:
    """Provenance sidecar; the timestamp makes it the one non-reproducible file."""
    return {
        "version": FORMAT_VERSION,
        "kind": "run",
        "artifact_version": ARTIFACT_VERSION,
        "command": command,
        "input_sha256": input_sha256,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_clock_ms": wall_clock_ms,
        "outputs": outputs,
    }
