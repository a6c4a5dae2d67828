"""Deterministic JSON and optional ANSI colour for reports."""
from __future__ import annotations

import json
import math
import os
import re

import numpy as np

_FLOAT_MARK = "\x00f:"
_FLOAT_RE = re.compile(r'"\\u0000f:([^"]*)"')


def _prepare(obj):
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return _FLOAT_MARK + format(v, ".17g")
    return obj


def dumps(obj) -> str:
    """Compact JSON with sorted keys and every float printed to 17 significant digits."""
    text = json.dumps(_prepare(obj), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return _FLOAT_RE.sub(lambda m: _float_literal(m.group(1)), text)


def _float_literal(digits):
    # keep floats recognisable as floats after the round trip
    if re.fullmatch(r"-?\d+", digits):
        return digits + ".0"
    return digits


_COLORS = {"ok": "32", "pass": "32", "fail": "31", "error": "31;1"}


def use_color(stream=None) -> bool:
    flag = os.environ.get("FORMLAB_COLOR")
    if flag is not None:
        return flag == "1"
    return bool(stream is not None and hasattr(stream, "isatty") and stream.isatty())


def paint(text, status, color=False):
    if not color:
        return text
    code = _COLORS.get(status.lower())
    return f"\x1b[{code}m{text}\x1b[0m" if code else text
