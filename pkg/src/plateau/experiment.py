"""Monte Carlo sweeps of gradient statistics over (qubits, layers) grids."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .gradient import Method, gradient, parameter_shift_batch
from .haar import predict_variance_case3
from .rpqc import ParamIndex, RpqcSpec, sample_arrays
from .statevector import PAULIS, Observable, Projector, zz_observable

log = logging.getLogger(__name__)

MAX_QUBITS = 26
# amplitudes per worker chunk; fixed so chunking never depends on worker count
CHUNK_AMPLITUDES = 1 << 18

CSV_HEADER = (
    "n_qubits",
    "n_layers",
    "samples",
    "grad_mean",
    "grad_var",
    "mean_stderr",
    "var_stderr",
    "pred_var_2design",
)

OBSERVABLES = ("zz", "projector")


class ResourceGuardError(RuntimeError):
    pass


def make_observable(name: str, n_qubits: int) -> Observable:
    if name == "zz":
        return zz_observable()
    if name == "projector":
        return Projector.zeros(n_qubits)
    raise ValueError(f"unknown observable {name!r}; expected one of {OBSERVABLES}")


# --------------------------------------------------------------------------
# Seeding
# --------------------------------------------------------------------------

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master_seed: int, n_qubits: int, n_layers: int, sample_index: int) -> int:
    """Stateless 64-bit seed for one Monte Carlo sample.

    Each field is folded in with a splitmix64 finaliser, which is a bijection,
    so for a fixed prefix distinct fields always give distinct seeds.
    """
    h = _mix64((master_seed + _GOLDEN) & _MASK)
    for f in (n_qubits, n_layers, sample_index):
        h = _mix64(((h ^ (f & _MASK)) + _GOLDEN) & _MASK)
    return h


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def derive_seeds(master_seed: int, n_qubits: int, n_layers: int, indices) -> np.ndarray:
    """Vectorised :func:`derive_seed` over sample indices (uint64 array)."""
    golden = np.uint64(_GOLDEN)
    with np.errstate(over="ignore"):
        prefix = _mix64((master_seed + _GOLDEN) & _MASK)
        for f in (n_qubits, n_layers):
            prefix = _mix64(((prefix ^ (f & _MASK)) + _GOLDEN) & _MASK)
        idx = np.asarray(indices, dtype=np.uint64)
        return _mix64_array((np.uint64(prefix) ^ idx) + golden)


# --------------------------------------------------------------------------
# Config and reports
# --------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    qubit_list: list[int]
    layer_list: list[int]
    samples_per_point: int = 500
    observable: str = "zz"
    grad_param: int = 0
    master_seed: int = 0
    method: str = Method.PARAMETER_SHIFT.value

    def __post_init__(self):
        self.qubit_list = [int(n) for n in self.qubit_list]
        self.layer_list = [int(L) for L in self.layer_list]
        self.method = Method(self.method).value
        self.validate()

    def validate(self) -> None:
        if not self.qubit_list or not self.layer_list:
            raise ValueError("qubit_list and layer_list must be non-empty")
        if self.samples_per_point < 2:
            raise ValueError(f"samples_per_point must be >= 2, got {self.samples_per_point}")
        if min(self.qubit_list) < 2:
            raise ValueError(f"every qubit count must be >= 2, got {min(self.qubit_list)}")
        if min(self.layer_list) < 1:
            raise ValueError(f"every layer count must be >= 1, got {min(self.layer_list)}")
        if self.observable not in OBSERVABLES:
            raise ValueError(f"unknown observable {self.observable!r}")
        if not 0 <= self.master_seed <= _MASK:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        smallest = min(self.qubit_list) * min(self.layer_list)
        if not 0 <= self.grad_param < smallest:
            raise ValueError(
                f"grad_param {self.grad_param} out of range for the smallest circuit "
                f"({smallest} parameters)"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["artifact_version"] = __version__
        return d


@dataclass(frozen=True)
class VarianceReport:
    n_qubits: int
    n_layers: int
    samples: int
    grad_mean: float
    grad_var: float
    mean_stderr: float
    var_stderr: float
    pred_var_2design: float

    def csv_row(self) -> list[str]:
        return [str(self.n_qubits), str(self.n_layers), str(self.samples)] + [
            format(x, ".17g")
            for x in (
                self.grad_mean, self.grad_var, self.mean_stderr, self.var_stderr,
                self.pred_var_2design,
            )
        ]


def summarize(values: Sequence[float], n_qubits: int, n_layers: int, predicted: float) -> VarianceReport:
    """Mean, unbiased variance and their standard errors, via compensated sums.

    The variance standard error uses the fourth central moment:
    ``sqrt((m4 - s2**2 (S-3)/(S-1)) / S)``.
    """
    x = np.asarray(values, dtype=np.float64)
    s = x.size
    if s < 2:
        raise ValueError("need at least 2 samples for an unbiased variance")
    mean = math.fsum(x) / s
    dev = x - mean
    var = math.fsum(dev ** 2) / (s - 1)
    m4 = math.fsum(dev ** 4) / s
    var_of_var = (m4 - var ** 2 * (s - 3) / (s - 1)) / s
    return VarianceReport(
        n_qubits=n_qubits,
        n_layers=n_layers,
        samples=s,
        grad_mean=mean,
        grad_var=var,
        mean_stderr=math.sqrt(var / s),
        var_stderr=math.sqrt(max(var_of_var, 0.0)),
        pred_var_2design=predicted,
    )


# --------------------------------------------------------------------------
# Running
# --------------------------------------------------------------------------


def default_workers() -> int:
    env = os.environ.get("PLATEAU_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sample_point_circuits(config: ExperimentConfig, n_qubits: int, n_layers: int):
    """Axis codes and angles ``(S, L, n)`` for every sample at one grid point."""
    s = config.samples_per_point
    codes = np.empty((s, n_layers, n_qubits), dtype=np.int64)
    angles = np.empty((s, n_layers, n_qubits), dtype=np.float64)
    seeds = derive_seeds(config.master_seed, n_qubits, n_layers, np.arange(s))
    for i, seed in enumerate(seeds):
        codes[i], angles[i] = sample_arrays(n_qubits, n_layers, np.random.default_rng(int(seed)))
    return codes, angles


def _slow_gradients(codes, angles, k: ParamIndex, obs: Observable, method: str) -> np.ndarray:
    out = np.empty(codes.shape[0])
    for i in range(codes.shape[0]):
        axes = tuple("".join(PAULIS[c] for c in row) for row in codes[i])
        spec = RpqcSpec(codes.shape[2], codes.shape[1], axes, angles[i])
        out[i] = gradient(spec, k, obs, method)
    return out


def point_gradients(
    config: ExperimentConfig, n_qubits: int, n_layers: int, workers: int | None = None
) -> np.ndarray:
    """Gradient samples at one grid point, in sample-index order."""
    if n_qubits > MAX_QUBITS:
        raise ResourceGuardError(
            f"refusing n={n_qubits}: dense statevectors above {MAX_QUBITS} qubits exceed memory"
        )
    k = config.grad_param
    if k >= n_qubits * n_layers:
        raise ValueError(f"grad_param {k} out of range for {n_qubits}x{n_layers} circuit")
    obs = make_observable(config.observable, n_qubits)
    codes, angles = sample_point_circuits(config, n_qubits, n_layers)
    s = config.samples_per_point
    chunk = max(1, CHUNK_AMPLITUDES >> n_qubits)
    bounds = [(a, min(a + chunk, s)) for a in range(0, s, chunk)]

    if config.method == Method.PARAMETER_SHIFT.value:
        def work(b):
            return parameter_shift_batch(n_qubits, codes[b[0]:b[1]], angles[b[0]:b[1]], k, obs)
    else:
        pk = ParamIndex.from_flat(k, n_qubits)

        def work(b):
            return _slow_gradients(codes[b[0]:b[1]], angles[b[0]:b[1]], pk, obs, config.method)

    workers = workers or default_workers()
    if workers == 1 or len(bounds) == 1:
        parts = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, bounds))
    return np.concatenate(parts)


def predicted_variance(observable: str, n_qubits: int) -> float:
    return predict_variance_case3(make_observable(observable, n_qubits), n_qubits).value


def run_point(
    config: ExperimentConfig, n_qubits: int, n_layers: int, workers: int | None = None
) -> VarianceReport:
    values = point_gradients(config, n_qubits, n_layers, workers)
    return summarize(values, n_qubits, n_layers, predicted_variance(config.observable, n_qubits))


def run_sweep(
    config: ExperimentConfig,
    workers: int | None = None,
    progress: Callable[[VarianceReport], None] | None = None,
) -> list[VarianceReport]:
    """Every (n, L) in ``qubit_list x layer_list``, qubits outer, layers inner."""
    too_big = [n for n in config.qubit_list if n > MAX_QUBITS]
    if too_big:
        raise ResourceGuardError(
            f"refusing qubit counts {too_big}: limit is {MAX_QUBITS} for dense simulation"
        )
    reports = []
    for n in config.qubit_list:
        for L in config.layer_list:
            report = run_point(config, n, L, workers)
            log.info("n=%d L=%d var=%.4g", n, L, report.grad_var)
            if progress is not None:
                progress(report)
            reports.append(report)
    return reports


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def write_csv(reports: Iterable[VarianceReport], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in reports:
            writer.writerow(r.csv_row())


def read_csv(path) -> list[VarianceReport]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ValueError(f"{path}: missing or unexpected CSV header")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields")
            try:
                out.append(
                    VarianceReport(
                        int(row[0]), int(row[1]), int(row[2]), *(float(x) for x in row[3:])
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not out:
        raise ValueError(f"{path}: no data rows")
    return out


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_sidecar(config: ExperimentConfig, csv_path) -> Path:
    path = sidecar_path(csv_path)
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def log_slope(xs: Sequence[float], variances: Sequence[float]) -> float:
    """Least-squares slope of ``ln(variance)`` against ``xs``."""
    slope, _ = np.polyfit(np.asarray(xs, dtype=float), np.log(np.asarray(variances)), 1)
    return float(slope)
