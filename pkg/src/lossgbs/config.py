"""Experiment configuration: a single strict JSON document.

Example::

    {
      "bank": {"squeezing": [0.4, 0.6], "mode_count": 3},
      "interferometer": {"haar_seed": 11},
      "loss": {"kind": "uniform", "eta": 0.5},
      "detector": {"pnr_cap": null, "dark_count_rate": 0.0},
      "policy": {"r_prime": [0.6, 0.8]},
      "run": {"sample_count": 100000, "rng_seed": 1, "cutoff": 6}
    }

Complex matrices are row-major nested lists of ``[re, im]`` pairs. Unknown
keys anywhere are rejected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .fock import SqueezerBank
from .linear_optics import Interferometer, haar_random_unitary
from .loss import DetectorModel, LossModel

__all__ = ["ConfigError", "PolicySpec", "RunSpec", "ExperimentConfig", "load_config", "parse_config", "parse_complex_matrix"]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class PolicySpec:
    r_prime: tuple[float, ...] | None = None
    c: float | None = None
    n0: int | None = None
    variant: str = "auto"


@dataclass(frozen=True)
class RunSpec:
    sample_count: int = 0
    rng_seed: int = 0
    cutoff: int = 6
    strict_saturation: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    bank: SqueezerBank
    interferometer: Interferometer
    loss: LossModel
    detector: DetectorModel
    policy: PolicySpec
    run: RunSpec


_SECTIONS = {
    "bank": {"squeezing", "phases", "mode_count"},
    "interferometer": {"haar_seed", "matrix", "matrix_file"},
    "loss": {"kind", "eta", "etas", "matrix"},
    "detector": {"pnr_cap", "dark_count_rate", "efficiencies"},
    "policy": {"r_prime", "c", "n0", "variant"},
    "run": {"sample_count", "rng_seed", "cutoff", "strict_saturation"},
}
_REQUIRED = {"bank", "interferometer", "loss", "policy", "run"}


def _check_keys(obj: Any, allowed: set, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(extra)}")
    return obj


def _int(value: Any, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}, got {value}")
    return value


def _real(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _reals(value: Any, where: str) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"{where}: expected a list of numbers")
    return tuple(_real(v, f"{where}[{i}]") for i, v in enumerate(value))


def parse_complex_matrix(value: Any, where: str = "matrix") -> np.ndarray:
    """Nested ``[[[re, im], ...], ...]`` to a complex array."""
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise ConfigError(f"{where}: expected a non-empty list of rows")
    out = np.zeros((len(value), len(value[0])), dtype=complex)
    for i, row in enumerate(value):
        if len(row) != out.shape[1]:
            raise ConfigError(f"{where}: row {i} has {len(row)} entries, expected {out.shape[1]}")
        for j, pair in enumerate(row):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ConfigError(f"{where}[{i}][{j}]: expected a [re, im] pair")
            out[i, j] = complex(_real(pair[0], f"{where}[{i}][{j}]"), _real(pair[1], f"{where}[{i}][{j}]"))
    return out


def _bank(obj: dict) -> SqueezerBank:
    obj = _check_keys(obj, _SECTIONS["bank"], "bank")
    if "squeezing" not in obj or "mode_count" not in obj:
        raise ConfigError("bank: 'squeezing' and 'mode_count' are required")
    phases = _reals(obj["phases"], "bank.phases") if "phases" in obj else ()
    return SqueezerBank(_reals(obj["squeezing"], "bank.squeezing"), _int(obj["mode_count"], "bank.mode_count", 1), phases)


def _interferometer(obj: dict, modes: int, base: Path | None) -> Interferometer:
    obj = _check_keys(obj, _SECTIONS["interferometer"], "interferometer")
    if len(obj) != 1:
        raise ConfigError("interferometer: give exactly one of haar_seed, matrix, matrix_file")
    if "haar_seed" in obj:
        return haar_random_unitary(modes, _int(obj["haar_seed"], "interferometer.haar_seed", 0))
    if "matrix" in obj:
        mat = parse_complex_matrix(obj["matrix"], "interferometer.matrix")
    else:
        path = Path(obj["matrix_file"])
        if base is not None and not path.is_absolute():
            path = base / path
        try:
            mat = parse_complex_matrix(json.loads(path.read_text(encoding="utf-8")), str(path))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"interferometer.matrix_file: {exc}") from exc
    if mat.shape != (modes, modes):
        raise ConfigError(f"interferometer: matrix must be {modes}x{modes}, got {mat.shape}")
    return Interferometer(mat)


def _loss(obj: dict) -> LossModel:
    obj = _check_keys(obj, _SECTIONS["loss"], "loss")
    kind = obj.get("kind")
    if kind == "uniform":
        _check_keys(obj, {"kind", "eta"}, "loss(uniform)")
        return LossModel.uniform(_real(obj.get("eta"), "loss.eta"))
    if kind == "per_mode":
        _check_keys(obj, {"kind", "etas"}, "loss(per_mode)")
        return LossModel.per_mode(_reals(obj.get("etas"), "loss.etas"))
    if kind == "general":
        _check_keys(obj, {"kind", "matrix"}, "loss(general)")
        return LossModel.general(parse_complex_matrix(obj.get("matrix"), "loss.matrix"))
    raise ConfigError(f"loss.kind must be uniform, per_mode or general, got {kind!r}")


def _detector(obj: dict) -> DetectorModel:
    obj = _check_keys(obj, _SECTIONS["detector"], "detector")
    cap = obj.get("pnr_cap")
    cap = math.inf if cap is None else _int(cap, "detector.pnr_cap", 1)
    effs = obj.get("efficiencies")
    effs = None if effs is None else _reals(effs, "detector.efficiencies")
    return DetectorModel(cap, _real(obj.get("dark_count_rate", 0.0), "detector.dark_count_rate"), effs)


def _policy(obj: dict) -> PolicySpec:
    obj = _check_keys(obj, _SECTIONS["policy"], "policy")
    r_prime = obj.get("r_prime")
    if r_prime is not None:
        r_prime = _reals(r_prime, "policy.r_prime") if isinstance(r_prime, list) else (_real(r_prime, "policy.r_prime"),)
    c = None if obj.get("c") is None else _real(obj["c"], "policy.c")
    if (r_prime is None) == (c is None):
        raise ConfigError("policy: give exactly one of r_prime, c")
    n0 = None if obj.get("n0") is None else _int(obj["n0"], "policy.n0", 0)
    variant = obj.get("variant", "auto")
    if variant not in ("auto", "uniform", "per_mode"):
        raise ConfigError(f"policy.variant must be auto, uniform or per_mode, got {variant!r}")
    return PolicySpec(r_prime, c, n0, variant)


def _run(obj: dict) -> RunSpec:
    obj = _check_keys(obj, _SECTIONS["run"], "run")
    strict = obj.get("strict_saturation", False)
    if not isinstance(strict, bool):
        raise ConfigError("run.strict_saturation: expected true or false")
    return RunSpec(
        _int(obj.get("sample_count", 0), "run.sample_count", 0),
        _int(obj.get("rng_seed", 0), "run.rng_seed", 0),
        _int(obj.get("cutoff", 6), "run.cutoff", 0),
        strict,
    )


def parse_config(doc: Any, base: Path | None = None) -> ExperimentConfig:
    """Validate a decoded JSON document. ``base`` resolves relative matrix files."""
    doc = _check_keys(doc, set(_SECTIONS), "config")
    missing = sorted(_REQUIRED - set(doc))
    if missing:
        raise ConfigError(f"config: missing section(s) {', '.join(missing)}")
    try:
        bank = _bank(doc["bank"])
        config = ExperimentConfig(
            bank=bank,
            interferometer=_interferometer(doc["interferometer"], bank.mode_count, base),
            loss=_loss(doc["loss"]),
            detector=_detector(doc.get("detector", {})),
            policy=_policy(doc["policy"]),
            run=_run(doc["run"]),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if config.detector.efficiencies is not None and len(config.detector.efficiencies) != bank.mode_count:
        raise ConfigError("detector.efficiencies: need one entry per mode")
    if config.loss.kind != "uniform":
        try:
            config.loss.transfer_matrix(bank.mode_count)
        except ValueError as exc:
            raise ConfigError(f"loss: {exc}") from exc
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(doc, path.parent)
