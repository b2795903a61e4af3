"""CSV and JSON serialisation with bit-exact float round trips."""

from __future__ import annotations

import csv
import io as _io
import json

import numpy as np

from .decorated import Decoration, DecoratedPath, Extension
from .errors import ContractError
from .paths import CadlagPath, Mode

_FMT = "%.17g"


def _f(x):
    return _FMT % x


def path_to_csv(path: CadlagPath) -> str:
    """Header ``t,x1..xd,mode``; left-limit columns ``l1..ld`` are added only
    when some cell ends in a jump after moving."""
    d = path.dim
    custom = path.has_custom_left()
    head = ["t"] + [f"x{i + 1}" for i in range(d)] + ["mode"]
    if custom:
        head += [f"l{i + 1}" for i in range(d)]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    n = path.times.size
    for k in range(n):
        # the mode column describes the cell starting at this row
        mode = Mode(path.modes[k]).name if k < n - 1 else ""
        row = [_f(path.times[k])] + [_f(v) for v in path.values[k]] + [mode]
        if custom:
            row += [_f(v) for v in path.left[k]]
        w.writerow(row)
    return buf.getvalue()


def path_from_csv(text: str) -> CadlagPath:
    rows = list(csv.reader(_io.StringIO(text)))
    head = rows[0]
    if head[0] != "t" or "mode" not in head:
        raise ContractError("CSV header must start with t and contain mode")
    mi = head.index("mode")
    d = mi - 1
    custom = len(head) > mi + 1
    body = rows[1:]
    t = np.array([float(r[0]) for r in body])
    v = np.array([[float(x) for x in r[1:mi]] for r in body]).reshape(-1, d)
    modes = [r[mi] for r in body[:-1]]
    left = None
    if custom:
        left = np.array([[float(x) for x in r[mi + 1:mi + 1 + d]] for r in body]).reshape(-1, d)
    return CadlagPath(t, v, modes, left=left)


def path_to_dict(path: CadlagPath) -> dict:
    out = {
        "domain": [path.a, path.b],
        "times": path.times.tolist(),
        "values": path.values.tolist(),
        "modes": [Mode(m).name for m in path.modes],
    }
    if path.has_custom_left():
        out["left"] = path.left.tolist()
    return out


def path_from_dict(obj: dict) -> CadlagPath:
    p = CadlagPath(obj["times"], obj["values"], obj["modes"], left=obj.get("left"))
    if list(p.domain) != [float(x) for x in obj["domain"]]:
        raise ContractError("domain does not match the time grid")
    return p


def path_to_json(path: CadlagPath) -> str:
    # json writes floats with repr, which round-trips doubles exactly
    return json.dumps(path_to_dict(path))


def path_from_json(text: str) -> CadlagPath:
    return path_from_dict(json.loads(text))


def decorated_to_dict(phi: DecoratedPath) -> dict:
    return {
        "skeleton": path_to_dict(phi.skeleton),
        "decorations": [{"t": d.t, "excursion": path_to_dict(d.excursion)} for d in phi.decorations],
    }


def decorated_from_dict(obj: dict) -> DecoratedPath:
    decs = tuple(Decoration(float(d["t"]), path_from_dict(d["excursion"])) for d in obj["decorations"])
    return DecoratedPath(path_from_dict(obj["skeleton"]), decs)


def decorated_to_json(phi: DecoratedPath) -> str:
    return json.dumps(decorated_to_dict(phi))


def decorated_from_json(text: str) -> DecoratedPath:
    return decorated_from_dict(json.loads(text))


def extension_to_csv(ext: Extension) -> str:
    """Columns ``u,x1..xd,tau_inv`` on the extended grid (right values)."""
    p = ext.extended
    head = ["u"] + [f"x{i + 1}" for i in range(p.dim)] + ["tau_inv"]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    clock = ext.tau_inv(p.times)
    for k in range(p.times.size):
        w.writerow([_f(p.times[k])] + [_f(v) for v in p.values[k]] + [_f(clock[k])])
    return buf.getvalue()


def write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
