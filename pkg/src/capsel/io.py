"""CSV datasets and JSON model files."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .baselines import AdaBoostModel, FobaModel, OneVsRestModel, StumpClassifier
from .model import DataError, FeatureMatrix, LabelVector, MulticlassModel, SelectionModel

FORMAT_VERSION = 1


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _resolve_label_col(label_col, header, width: int) -> Optional[int]:
    if label_col is None:
        return None
    if isinstance(label_col, str) and not label_col.lstrip("-").isdigit():
        if header is None:
            raise DataError(f"label column {label_col!r} given by name but the file has no header")
        if label_col not in header:
            raise DataError(f"no column named {label_col!r}; columns are {', '.join(header)}")
        return header.index(label_col)
    idx = int(label_col)
    if not -width <= idx < width:
        raise DataError(f"label column index {idx} out of range for {width} columns")
    return idx % width


def load_dataset(path: Union[str, Path], label_col: Union[int, str, None] = -1
                 ) -> tuple[FeatureMatrix, Optional[LabelVector]]:
    """Read a delimited text file into features and labels.

    The first row is a header when any of its cells is not a number.
    ``label_col`` is a column name, an index (negative counts from the end)
    or ``None`` for unlabeled files. Rows keep their on-disk order. Errors
    name the 1-based data row, the file line and the column.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        try:
            dialect = csv.Sniffer().sniff(sample, delimiters=",;\t") if sample.strip() else csv.excel
        except csv.Error:
            dialect = csv.excel
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh, dialect)) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no rows")
    header = None
    first = [c.strip() for c in rows[0][1]]
    if not all(_is_number(c) for c in first):
        header = first
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: header but no data rows")
    width = len(header) if header is not None else len(rows[0][1])
    lab = _resolve_label_col(label_col, header, width)
    feat_cols = [j for j in range(width) if j != lab]
    if not feat_cols:
        raise DataError(f"{path}: no feature columns")
    names = tuple(header[j] for j in feat_cols) if header is not None else None

    X = np.empty((len(rows), len(feat_cols)))
    y = np.empty(len(rows), dtype=np.int64) if lab is not None else None
    for r, (line, cells) in enumerate(rows):
        where = f"{path}: data row {r + 1} (line {line})"
        if len(cells) != width:
            raise DataError(f"{where}: expected {width} columns, found {len(cells)}")
        for c, j in enumerate(feat_cols):
            cell = cells[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{where}, column {j + 1}: non-numeric value {cell!r}") from None
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise DataError(f"{where}, column {j + 1}: value {cell} outside [0, 1]")
            X[r, c] = v
        if lab is not None:
            cell = cells[lab].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{where}, column {lab + 1}: non-numeric label {cell!r}") from None
            if not v.is_integer():
                raise DataError(f"{where}, column {lab + 1}: label {cell} is not an integer class id")
            y[r] = int(v)
    return FeatureMatrix(X, names), (LabelVector(y) if y is not None else None)


def write_dataset(path: Union[str, Path], F, labels=None, label_name: str = "label") -> None:
    """Write features (and labels, as the last column) with a header row.

    Values use ``repr`` so a reload is exact.
    """
    if not isinstance(F, FeatureMatrix):
        F = FeatureMatrix(F)
    names = list(F.names())
    y = None if labels is None else np.asarray(getattr(labels, "labels", labels))
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ([label_name] if y is not None else []))
        for i, row in enumerate(F.values):
            cells = [repr(float(v)) for v in row]
            if y is not None:
                cells.append(str(int(y[i])))
            w.writerow(cells)


# -- model files -------------------------------------------------------------

def _selection_to_dict(m: SelectionModel) -> dict:
    nz = np.flatnonzero(m.weights)
    return {
        "k": m.k,
        "p0": m.p0,
        "p1": m.p1,
        "theta": m.theta,
        "selection_eps": m.selection_eps,
        "n_features": m.n_features,
        "flip_mask": [int(b) for b in m.flip_mask],
        # every nonzero weight, ascending index, full precision
        "weights": [[int(j), float(m.weights[j])] for j in nz],
    }


def _selection_from_dict(d: dict, names) -> SelectionModel:
    w = np.zeros(int(d["n_features"]))
    for j, v in d["weights"]:
        w[int(j)] = float(v)
    return SelectionModel(
        weights=w, flip_mask=np.asarray(d["flip_mask"], dtype=bool), k=int(d["k"]),
        p0=float(d["p0"]), p1=float(d["p1"]), theta=float(d["theta"]),
        selection_eps=float(d["selection_eps"]), feature_names=names,
    )


def _mask_list(mask):
    return None if mask is None else [int(b) for b in mask]


def _mask_array(lst):
    return None if lst is None else np.asarray(lst, dtype=bool)


def _foba_to_dict(m: FobaModel) -> dict:
    return {
        "n_features": m.n_features,
        "selected": [int(j) for j in m.selected],
        "intercept": m.intercept,
        "coef": [float(c) for c in m.coef],
        "threshold": m.threshold,
        "flip_mask": _mask_list(m.flip_mask),
    }


def _foba_from_dict(d: dict) -> FobaModel:
    return FobaModel(
        selected=tuple(int(j) for j in d["selected"]), intercept=float(d["intercept"]),
        coef=np.asarray(d["coef"], dtype=np.float64), n_features=int(d["n_features"]),
        threshold=float(d["threshold"]), flip_mask=_mask_array(d["flip_mask"]),
    )


def _ada_to_dict(m: AdaBoostModel) -> dict:
    return {
        "n_features": m.n_features,
        "flip_mask": _mask_list(m.flip_mask),
        "stumps": [[s.feature_index, s.threshold, s.polarity, s.alpha] for s in m.stumps],
    }


def _ada_from_dict(d: dict) -> AdaBoostModel:
    stumps = tuple(StumpClassifier(int(j), float(t), int(p), float(a)) for j, t, p, a in d["stumps"])
    return AdaBoostModel(stumps, int(d["n_features"]), _mask_array(d["flip_mask"]))


_ENCODERS = {
    SelectionModel: _selection_to_dict,
    FobaModel: _foba_to_dict,
    AdaBoostModel: _ada_to_dict,
}


def model_to_dict(model, method: str, feature_names=None) -> dict:
    out = {"format": FORMAT_VERSION, "method": method}
    if isinstance(model, (MulticlassModel, OneVsRestModel)):
        out["classes"] = [int(c) for c in model.classes]
        out["models"] = [_ENCODERS[type(m)](m) for m in model.models]
        out["n_features"] = model.n_features
    else:
        out.update(_ENCODERS[type(model)](model))
    if feature_names is None and isinstance(model, SelectionModel):
        feature_names = model.feature_names
    out["feature_names"] = None if feature_names is None else list(feature_names)
    return out


def model_from_dict(d: dict):
    """Inverse of :func:`model_to_dict`; returns ``(model, method)``."""
    if d.get("format") != FORMAT_VERSION:
        raise DataError(f"unsupported model file format {d.get('format')!r}")
    method = d["method"]
    names = None if d.get("feature_names") is None else tuple(d["feature_names"])
    if method in ("ours", "average"):
        decode = lambda x: _selection_from_dict(x, names)
    elif method == "foba":
        decode = _foba_from_dict
    elif method == "adaboost":
        decode = _ada_from_dict
    else:
        raise DataError(f"unknown method {method!r} in model file")
    if "classes" in d:
        models = tuple(decode(m) for m in d["models"])
        if method in ("ours", "average"):
            return MulticlassModel(tuple(d["classes"]), models), method
        return OneVsRestModel(tuple(d["classes"]), models), method
    return decode(d), method


def save_model(path: Union[str, Path], model, method: str, feature_names=None) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model, method, feature_names), indent=1) + "\n")


def load_model(path: Union[str, Path]):
    """Returns ``(model, method)``."""
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: not a model file ({e})") from None
    return model_from_dict(d)
