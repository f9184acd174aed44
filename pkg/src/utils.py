import sys
import os
import json
import math
import hashlib
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
import dill

from src.exception import customException


def save_object(file_path, obj):
    try:
        dir_path = os.path.dirname(file_path)
        if dir_path:
            os.makedirs(dir_path, exist_ok=True)
        with open(file_path, "wb") as file_obj:
            dill.dump(obj, file_obj)
    except Exception as e:
        raise customException(e, sys)


def load_object(file_path):
    try:
        with open(file_path, "rb") as file_obj:
            return dill.load(file_obj)
    except Exception as e:
        raise customException(e, sys)


def to_jsonable(obj: Any) -> Any:
    """Convert results into plain JSON values. Non-finite floats become strings."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def write_json(file_path: str, payload: Any) -> str:
    """Write a payload with sorted keys so reruns are byte-identical."""
    try:
        dir_path = os.path.dirname(file_path)
        if dir_path:
            os.makedirs(dir_path, exist_ok=True)
        with open(file_path, "w", encoding="utf-8") as file_obj:
            json.dump(to_jsonable(payload), file_obj, sort_keys=True, indent=2)
            file_obj.write("\n")
        return file_path
    except Exception as e:
        raise customException(e, sys)


def read_json(file_path: str) -> Any:
    try:
        with open(file_path, "r", encoding="utf-8") as file_obj:
            return json.load(file_obj)
    except Exception as e:
        raise customException(e, sys)


def write_csv(file_path: str, rows: List[Dict[str, Any]], sort_by: Optional[Iterable[str]] = None,
              columns: Optional[List[str]] = None) -> str:
    """Write rows through pandas, sorted by the given key columns."""
    try:
        dir_path = os.path.dirname(file_path)
        if dir_path:
            os.makedirs(dir_path, exist_ok=True)
        df = pd.DataFrame([to_jsonable(r) for r in rows], columns=columns)
        if sort_by and len(df):
            df = df.sort_values(list(sort_by), kind="mergesort").reset_index(drop=True)
        df.to_csv(file_path, index=False, float_format="%.17g")
        return file_path
    except Exception as e:
        raise customException(e, sys)


def array_digest(arrays: Iterable[np.ndarray]) -> str:
    """SHA-256 over the raw bytes of a sequence of arrays."""
    h = hashlib.sha256()
    for arr in arrays:
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def artifact_metadata(geometry=None, family=None, seed: Optional[int] = None,
                      version: Optional[str] = None, **extra) -> Dict[str, Any]:
    """Metadata block embedded in every artifact so a run can be repeated exactly."""
    from src.config import config

    meta: Dict[str, Any] = {
        "version": version or config.output.version,
        "seed": seed,
    }
    if geometry is not None:
        meta["grid"] = geometry.to_dict()
    if family is not None:
        meta["family_id"] = family.family_id
        meta["j_range"] = list(family.j_range)
    meta.update(extra)
    return meta
