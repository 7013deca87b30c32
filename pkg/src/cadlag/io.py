"""Text documents for paths and discrete measures.

Both are JSON objects tagged by ``format``.

Path document (``"format": "cadlag-path"``)::

    {"format": "cadlag-path", "kind": "step", "breaks": [0, 0.5],
     "values": [0, 1], "terminal_value": 1}

``kind`` is ``"step"`` (constant between breaks) or ``"pl"`` (linear from
each value to the next one, the last piece ending at ``terminal_value``).
A ``"pl"`` document may add ``left_limits``, the value approached at the
right end of each piece, to describe linear pieces that end in a jump.
``horizon`` defaults to 1.

Measure document (``"format": "cadlag-measure"``)::

    {"format": "cadlag-measure", "atoms": ["a", "b"], "weights": [0.5, 0.5],
     "dist": [[0, 1], [1, 0]]}

Floats are written with ``repr`` precision, so documents round-trip exactly.
"""
import json
import math
import re

from .errors import CadlagError, ParseError
from .metrics import DiscreteMeasure
from .paths import CadlagPath

PATH_FORMAT = "cadlag-path"
PATH_LIST_FORMAT = "cadlag-path-list"
MEASURE_FORMAT = "cadlag-measure"


def _field_line(text, name):
    m = re.search(r'"%s"\s*:' % re.escape(name), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _load(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object", line=1)
    return doc


def _get(doc, text, name, required=True, default=None):
    if name not in doc:
        if required:
            raise ParseError("missing required field", field=name)
        return default
    return doc[name]


def _real(value, text, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParseError(f"expected a finite number, got {value!r}", _field_line(text, name), name)
    return float(value)


def _reals(value, text, name):
    if not isinstance(value, list):
        raise ParseError("expected a list of numbers", _field_line(text, name), name)
    return [_real(v, text, name) for v in value]


def _check_format(doc, text, expected):
    fmt = _get(doc, text, "format")
    if fmt not in expected:
        raise ParseError(f"expected one of {list(expected)}, got {fmt!r}",
                         _field_line(text, "format"), "format")
    return fmt


def _path_from_doc(doc, text):
    kind = _get(doc, text, "kind")
    if kind not in ("step", "pl"):
        raise ParseError(f"kind must be 'step' or 'pl', got {kind!r}", _field_line(text, "kind"), "kind")
    breaks = _reals(_get(doc, text, "breaks"), text, "breaks")
    values = _reals(_get(doc, text, "values"), text, "values")
    terminal = _real(_get(doc, text, "terminal_value"), text, "terminal_value")
    horizon = _real(_get(doc, text, "horizon", False, 1.0), text, "horizon")
    if len(values) != len(breaks):
        raise ParseError("values and breaks differ in length", _field_line(text, "values"), "values")
    if not breaks or breaks[0] != 0.0:
        raise ParseError("breaks must start at 0", _field_line(text, "breaks"), "breaks")
    if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])) or breaks[-1] >= horizon:
        raise ParseError("breaks must increase strictly and stay below the horizon",
                         _field_line(text, "breaks"), "breaks")
    left = _get(doc, text, "left_limits", False)
    if kind == "step":
        if left is not None:
            raise ParseError("step paths take no left_limits", _field_line(text, "left_limits"),
                             "left_limits")
        ends = None
    elif left is None:
        ends = values[1:] + [terminal]
    else:
        ends = _reals(left, text, "left_limits")
        if len(ends) != len(breaks):
            raise ParseError("left_limits and breaks differ in length",
                             _field_line(text, "left_limits"), "left_limits")
    try:
        return CadlagPath(breaks, values, ends, terminal, horizon)
    except CadlagError as exc:
        raise ParseError(str(exc)) from None


def parse_path(text):
    """CadlagPath from a path document."""
    doc = _load(text)
    _check_format(doc, text, (PATH_FORMAT,))
    return _path_from_doc(doc, text)


def parse_paths(text):
    """List of paths from a path document or a path-list document."""
    doc = _load(text)
    fmt = _check_format(doc, text, (PATH_FORMAT, PATH_LIST_FORMAT))
    if fmt == PATH_FORMAT:
        return [_path_from_doc(doc, text)]
    items = _get(doc, text, "paths")
    if not isinstance(items, list) or not all(isinstance(d, dict) for d in items):
        raise ParseError("expected a list of path objects", _field_line(text, "paths"), "paths")
    return [_path_from_doc(d, text) for d in items]


def path_to_doc(x):
    doc = {"format": PATH_FORMAT}
    if x.is_step:
        doc["kind"] = "step"
    else:
        doc["kind"] = "pl"
        nxt = list(x.starts[1:]) + [x.terminal]
        if any(e != s for e, s in zip(x.ends, nxt)):
            doc["left_limits"] = [float(v) for v in x.ends]
    doc["breaks"] = [float(v) for v in x.breaks]
    doc["values"] = [float(v) for v in x.starts]
    doc["terminal_value"] = float(x.terminal)
    if x.horizon != 1.0:
        doc["horizon"] = float(x.horizon)
    return doc


def format_path(x):
    return json.dumps(path_to_doc(x), indent=1) + "\n"


def format_paths(paths):
    docs = [{k: v for k, v in path_to_doc(x).items() if k != "format"} for x in paths]
    return json.dumps({"format": PATH_LIST_FORMAT, "paths": docs}, indent=1) + "\n"


def parse_measure(text):
    doc = _load(text)
    _check_format(doc, text, (MEASURE_FORMAT,))
    atoms = _get(doc, text, "atoms")
    if not isinstance(atoms, list) or not all(isinstance(a, (str, int, float)) for a in atoms):
        raise ParseError("atoms must be a list of labels", _field_line(text, "atoms"), "atoms")
    weights = _reals(_get(doc, text, "weights"), text, "weights")
    dist = _get(doc, text, "dist")
    if not isinstance(dist, list) or not all(isinstance(r, list) for r in dist):
        raise ParseError("dist must be a list of rows", _field_line(text, "dist"), "dist")
    rows = [_reals(r, text, "dist") for r in dist]
    try:
        return DiscreteMeasure(atoms, weights, rows)
    except CadlagError as exc:
        raise ParseError(str(exc)) from None


def format_measure(m):
    doc = {"format": MEASURE_FORMAT, "atoms": list(m.atoms),
           "weights": [float(w) for w in m.weights],
           "dist": [[float(v) for v in row] for row in m.dist]}
    return json.dumps(doc, indent=1) + "\n"


def read_path(filename):
    with open(filename, encoding="utf-8") as fh:
        return parse_path(fh.read())


def read_measure(filename):
    with open(filename, encoding="utf-8") as fh:
        return parse_measure(fh.read())
