"""JSON serialization of tuples, reports and dilation models.

Complex entries are stored as [re, im] pairs of JSON numbers; Python's float
repr is shortest-exact, so round-trips are bit-faithful.  Every document
carries a ``schema_version``.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .builder import CouplingData, DilationModel, SumSpace, TransferData
from .errors import MalformedSpec
from .fock import FockModel
from .tuples import AlgebraStructure, TupleSpec, merge_1n

SCHEMA_VERSION = 1


def complex_to_json(arr: np.ndarray) -> list:
    """Nested lists of [re, im] pairs, row-major."""
    arr = np.asarray(arr, dtype=complex)
    if arr.ndim == 1:
        return [[float(v.real), float(v.imag)] for v in arr]
    return [complex_to_json(row) for row in arr]


def json_to_complex(data, path: str = "$") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedSpec(f"{path}: expected nested [re, im] number pairs ({exc})")
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise MalformedSpec(f"{path}: innermost entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise MalformedSpec(f"{path}.{key}: missing required field")
    value = doc[key]
    if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise MalformedSpec(f"{path}.{key}: expected an integer, got {type(value).__name__}")
    if kind is list and not isinstance(value, list):
        raise MalformedSpec(f"{path}.{key}: expected a list, got {type(value).__name__}")
    if kind is dict and not isinstance(value, dict):
        raise MalformedSpec(f"{path}.{key}: expected an object, got {type(value).__name__}")
    return value


def tuple_to_dict(spec: TupleSpec) -> dict:
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "n": spec.n,
        "dimH": spec.dimH,
        "d": spec.d,
        "matrices": [[complex_to_json(m) for m in row] for row in spec.blocks],
    }
    if not np.allclose(spec.phases, 1.0, atol=0, rtol=0):
        doc["phases"] = complex_to_json(spec.phases)
    if spec.algebra is not None:
        doc["algebra"] = {"k": spec.algebra.k,
                          "block_of": list(spec.algebra.block_of),
                          "automorphisms": [list(a) for a in spec.algebra.automorphisms]}
    return doc


def tuple_from_dict(doc: dict, path: str = "$") -> TupleSpec:
    if not isinstance(doc, dict):
        raise MalformedSpec(f"{path}: tuple document must be a JSON object")
    n = _require(doc, "n", int, path)
    dim = _require(doc, "dimH", int, path)
    d = doc.get("d", 1)
    mats = _require(doc, "matrices", list, path)
    if len(mats) != n:
        raise MalformedSpec(f"{path}.matrices: expected {n} rows, got {len(mats)}")
    blocks = []
    for i, row in enumerate(mats):
        if not isinstance(row, list) or len(row) != d:
            raise MalformedSpec(f"{path}.matrices[{i}]: expected {d} matrices")
        blocks.append([json_to_complex(m, f"{path}.matrices[{i}][{j}]") for j, m in enumerate(row)])
    phases = None
    if "phases" in doc and doc["phases"] is not None:
        phases = json_to_complex(doc["phases"], f"{path}.phases")
    algebra = None
    if "algebra" in doc and doc["algebra"] is not None:
        alg = _require(doc, "algebra", dict, path)
        algebra = AlgebraStructure(
            k=_require(alg, "k", int, f"{path}.algebra"),
            block_of=_require(alg, "block_of", list, f"{path}.algebra"),
            automorphisms=_require(alg, "automorphisms", list, f"{path}.algebra"))
    try:
        return TupleSpec(n=n, dimH=dim, d=d, blocks=blocks, phases=phases, algebra=algebra)
    except MalformedSpec:
        raise
    except Exception as exc:  # shape errors from numpy land here with context
        raise MalformedSpec(f"{path}: {exc}")


def load_tuple(path: str) -> TupleSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedSpec(f"{path}: invalid JSON: {exc}")
    return tuple_from_dict(doc, path="$")


def dump_json(doc: dict, path: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    return text


def model_to_dict(model: DilationModel) -> dict:
    c = model.coupling
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "dilation_model",
        "tuple": tuple_to_dict(model.spec),
        "N": model.N,
        "dims": {"coeff": model.fock.coeff_dim,
                 "cells": model.fock.cell_count,
                 "aux1": c.aux1_dim, "aux2": c.aux2_dim,
                 "parts_D": [list(p) for p in c.Dspace.parts],
                 "parts_Udom": [list(p) for p in c.Udom.parts],
                 "parts_Dprime": [list(p) for p in c.Dprime.parts]},
        "labels": {"D": c.Dspace.labels.tolist(),
                   "Udom": c.Udom.labels.tolist(),
                   "Dprime": c.Dprime.labels.tolist(),
                   "Q1": model.defects["hat1"].labels.tolist(),
                   "Qn": model.defects["hatn"].labels.tolist(),
                   "Q1n": model.defects["hat1n"].labels.tolist()},
        "index_list": [list(a) for a in model.fock.index_list],
        "U": complex_to_json(c.U),
        "V": complex_to_json(c.V),
        "U1": complex_to_json(model.transfer.U1),
        "Un": complex_to_json(model.transfer.Un),
        "Pi": complex_to_json(model.Pi),
        "isometries": [complex_to_json(w) for w in model.isometries],
        "tails": [float(t) for t in model.tails],
        "equality_residual": float(model.equality_residual),
        "defect_bases": {name: complex_to_json(d.space.basis)
                         for name, d in model.defects.items()},
        "defect_roots": {name: complex_to_json(d.root) for name, d in model.defects.items()},
    }


def model_from_dict(doc: dict) -> DilationModel:
    """Rebuild a verifiable model from its JSON document.

    The matrices are taken from the file (so file-level corruption is caught
    by the verifier), while cheap derived objects are recomputed.
    """
    from .builder import build_defects  # local import to avoid cycles

    if doc.get("kind") != "dilation_model":
        raise MalformedSpec("$.kind: expected 'dilation_model'")
    spec = tuple_from_dict(_require(doc, "tuple", dict, "$"), "$.tuple")
    merged = merge_1n(spec)
    n_cells = len(_require(doc, "index_list", list, "$"))
    coeff = _require(doc, "dims", dict, "$")["coeff"]
    fock = FockModel(m=merged.n, N=int(doc["N"]), coeff_dim=int(coeff),
                     merged_phases=merged.phases)
    if fock.cell_count != n_cells:
        raise MalformedSpec("$.index_list: cell count does not match N")

    defects, _, _, eq_resid = build_defects(spec)
    labels = doc["labels"]
    dims = doc["dims"]
    coupling = CouplingData(
        V0=np.zeros((0, 0)), D1=None, D2=None, M1=None, M2=None,  # type: ignore[arg-type]
        amb1_labels=np.asarray(labels["D"][:dims["coeff"] - dims["aux1"]], dtype=int),
        amb2_labels=np.asarray(labels["Udom"][:dims["coeff"] - dims["aux2"]], dtype=int),
        M1_labels=np.zeros(0, dtype=int), M2_labels=np.zeros(0, dtype=int),
        aux1_dim=int(dims["aux1"]), aux2_dim=int(dims["aux2"]),
        U=json_to_complex(doc["U"], "$.U"), V=json_to_complex(doc["V"], "$.V"),
        Dspace=SumSpace([tuple(p) for p in dims["parts_D"]], np.asarray(labels["D"], dtype=int)),
        Udom=SumSpace([tuple(p) for p in dims["parts_Udom"]], np.asarray(labels["Udom"], dtype=int)),
        Dprime=SumSpace([tuple(p) for p in dims["parts_Dprime"]],
                        np.asarray(labels["Dprime"], dtype=int)))
    transfer = TransferData(U1=json_to_complex(doc["U1"], "$.U1"),
                            Un=json_to_complex(doc["Un"], "$.Un"),
                            blocks={}, structural={}, residuals={})
    isometries = [json_to_complex(w, f"$.isometries[{i}]")
                  for i, w in enumerate(doc["isometries"])]
    return DilationModel(spec=spec, merged=merged, fock=fock, N=int(doc["N"]),
                         defects=defects, coupling=coupling, transfer=transfer,
                         Pi=json_to_complex(doc["Pi"], "$.Pi"),
                         isometries=isometries,
                         tails=np.asarray(doc["tails"], dtype=float),
                         equality_residual=eq_resid)


def load_model(path: str) -> DilationModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedSpec(f"{path}: invalid JSON: {exc}")
    return model_from_dict(doc)


def class_report_doc(report) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "class_report", **report.to_dict()}


def verification_report_doc(report) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "verification_report", **report.to_dict()}
