# -*- coding: utf-8 -*-
"""
Report Writer - deterministic JSON and CSV output.

JSON keys follow model field order, floats use the shortest round-trip
form, complex numbers are written as [re, im] and non-finite values are
rejected. Certificates use their own compact record layout.
"""
import json
import sys
import types
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar, Union, get_args, get_origin

import pandas as pd
from pydantic import BaseModel, ValidationError
from typing_extensions import Annotated

from .data_models import (
    BackwardOrbit, CycleCertificate, DensityReport, Disk, ExpParameter, MisiurewiczCertificate,
    TransferResult, TrapBallCertificate,
)
from .exceptions import ReportError

_UNION_TYPES = (Union, getattr(types, "UnionType", Union))

ModelT = TypeVar("ModelT", bound=BaseModel)
AnyCertificate = Union[CycleCertificate, TrapBallCertificate, MisiurewiczCertificate]

# field name -> JSON key
_KEY_ALIASES = {"lam": "lambda"}
_FIELD_NAMES = {v: k for k, v in _KEY_ALIASES.items()}


def _pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


# ==================== certificate codec ====================

def certificate_to_record(cert: AnyCertificate) -> Dict[str, Any]:
    """Compact record of a certificate, in the documented key order."""
    if isinstance(cert, CycleCertificate):
        return {
            "lambda": _pair(cert.lam.lam), "kind": "cycle", "period": cert.period,
            "center": _pair(cert.disk.center), "rho": cert.disk.radius,
            "final_center": _pair(cert.final_disk.center), "final_rho": cert.final_disk.radius,
            "mult_log_mod": cert.multiplier_log_mod,
        }
    if isinstance(cert, TrapBallCertificate):
        return {
            "lambda": _pair(cert.lam.lam), "kind": "trap", "n": cert.n,
            "center": [0.0, 0.0], "rho": cert.rho,
            "final_center": _pair(cert.final_disk.center), "final_rho": cert.final_disk.radius,
            "mult_log_mod": cert.log_mod, "P": cert.P,
        }
    if isinstance(cert, MisiurewiczCertificate):
        return {
            "lambda": _pair(cert.lam.lam), "preperiod": cert.preperiod, "period": cert.period,
            "residual": cert.residual, "mult_log_mod": cert.cycle_mult_log_mod,
            "ps_bound": cert.postsingular_bound,
        }
    raise ReportError(f"not a certificate: {type(cert).__name__}")


def certificate_from_record(record: Dict[str, Any]) -> AnyCertificate:
    """Inverse of certificate_to_record."""
    try:
        lam = ExpParameter(lam=complex(*record["lambda"]))
        kind = record.get("kind")
        if kind == "cycle":
            return CycleCertificate(
                lam=lam, period=record["period"],
                disk=Disk(center=complex(*record["center"]), radius=record["rho"]),
                final_disk=Disk(center=complex(*record["final_center"]), radius=record["final_rho"]),
                multiplier_log_mod=record["mult_log_mod"],
            )
        if kind == "trap":
            return TrapBallCertificate(
                lam=lam, n=record["n"], P=record["P"], rho=record["rho"],
                final_disk=Disk(center=complex(*record["final_center"]), radius=record["final_rho"]),
                log_mod=record["mult_log_mod"],
            )
        return MisiurewiczCertificate(
            lam=lam, preperiod=record["preperiod"], period=record["period"], residual=record["residual"],
            cycle_mult_log_mod=record["mult_log_mod"], postsingular_bound=record["ps_bound"],
        )
    except (KeyError, TypeError, ValidationError) as exc:
        raise ReportError(f"malformed certificate record: {exc}") from exc


# ==================== generic records ====================

def to_record(value: Any) -> Any:
    """Converts models and values into JSON-ready data."""
    if isinstance(value, (CycleCertificate, TrapBallCertificate, MisiurewiczCertificate)):
        return certificate_to_record(value)
    if isinstance(value, ExpParameter):
        return _pair(value.lam)
    if isinstance(value, BaseModel):
        return {_KEY_ALIASES.get(name, name): to_record(getattr(value, name))
                for name in type(value).model_fields}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, complex):
        return _pair(value)
    if isinstance(value, dict):
        return {str(k): to_record(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_record(v) for v in value]
    if hasattr(value, "item"):
        return to_record(value.item())
    raise ReportError(f"cannot serialize {type(value).__name__}")


def _revive(annotation: Any, value: Any) -> Any:
    if value is None:
        return None
    origin = get_origin(annotation)
    if origin is Annotated:
        return _revive(get_args(annotation)[0], value)
    if origin in _UNION_TYPES:
        options = [a for a in get_args(annotation) if a is not type(None)]
        if isinstance(value, dict) and "kind" in value:
            return certificate_from_record(value)
        return _revive(options[0], value)
    if origin in (list, List):
        (item,) = get_args(annotation) or (Any,)
        return [_revive(item, v) for v in value]
    if origin is tuple:
        return tuple(_revive(a, v) for a, v in zip(get_args(annotation), value))
    if origin in (dict, Dict):
        return value
    if annotation is complex:
        return complex(*value)
    if annotation is ExpParameter:
        return ExpParameter(lam=complex(*value))
    if isinstance(annotation, type) and issubclass(annotation, (CycleCertificate, TrapBallCertificate,
                                                                MisiurewiczCertificate)):
        return certificate_from_record(value)
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        return from_record(annotation, value)
    if isinstance(annotation, type) and issubclass(annotation, Enum):
        return annotation(value)
    return value


def from_record(model: Type[ModelT], record: Dict[str, Any]) -> ModelT:
    """Rebuilds a model from the output of to_record."""
    try:
        data = {}
        for key, raw in record.items():
            name = _FIELD_NAMES.get(key, key)
            if name in model.model_fields:
                data[name] = _revive(model.model_fields[name].annotation, raw)
        return model(**data)
    except (TypeError, ValidationError) as exc:
        raise ReportError(f"cannot rebuild {model.__name__}: {exc}") from exc


# ==================== JSON ====================

def dumps_report(report: Any) -> str:
    """Deterministic JSON text with a trailing newline."""
    try:
        return json.dumps(to_record(report), indent=2, allow_nan=False, ensure_ascii=False) + "\n"
    except ValueError as exc:
        raise ReportError(f"report contains a non-finite value: {exc}") from exc


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc


def write_report(report: Any, fmt: str = "json", path: Optional[str] = None) -> None:
    """
    Writes a report as JSON or CSV to path ("-" or None for stdout).

    Args:
        report: A model, a plain value tree, or a DataFrame for CSV.
        fmt: "json" or "csv".
        path: Output path.
    """
    if fmt == "json":
        _emit(dumps_report(report), path)
    elif fmt == "csv":
        frame = report if isinstance(report, pd.DataFrame) else to_frame(report)
        _emit(frame.to_csv(index=False, lineterminator="\n"), path)
    else:
        raise ReportError(f"unknown report format: {fmt!r}")


def read_report(path: str) -> Any:
    """Parses a JSON report written by write_report."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, ValueError) as exc:
        raise ReportError(f"cannot read {path}: {exc}") from exc


# ==================== CSV ====================

def density_frame(report: DensityReport) -> pd.DataFrame:
    """One row per classified sample."""
    return pd.DataFrame({
        "radius_index": [s.radius_index for s in report.samples],
        "index": [s.index for s in report.samples],
        "lambda_re": [s.lam.real for s in report.samples],
        "lambda_im": [s.lam.imag for s in report.samples],
        "verdict": [s.verdict.value for s in report.samples],
        "period_or_n": [s.period_or_n for s in report.samples],
        "iterations": [s.iterations for s in report.samples],
    })


def transfer_frame(b: BackwardOrbit, result: TransferResult) -> pd.DataFrame:
    """Deviation |y_k - z_k| against |z_k| along a transferred orbit."""
    return pd.DataFrame({
        "k": list(range(len(b.z))),
        "dev": [abs(y - z) for y, z in zip(result.y, b.z)],
        "abs_z": [abs(z) for z in b.z],
    })


def to_frame(report: Any) -> pd.DataFrame:
    if isinstance(report, DensityReport):
        return density_frame(report)
    raise ReportError(f"no CSV layout for {type(report).__name__}")
