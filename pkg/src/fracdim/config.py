"""Configuration files for the command-line tools.

A system configuration is a JSON document that names one of the four
system kinds and carries exactly the parameters that kind needs, plus
shared sampling / tolerance settings.  The loader is strict by design:
the schema is versioned, unknown fields are rejected (with the full
field path, so a typo like ``system.alpa`` is caught before any
computation starts), and the owning module's constructor runs at load
time so its preconditions fire here rather than halfway through a run.

Numbers may be written as JSON numbers or as strings handed to
``Fraction`` -- ``"2/3"``, ``"-1/2"`` -- which is how exact rational
mode is requested (the quotient-condition witnesses, the exact Markov
detection for algebraic beta).  The tent kind additionally accepts
``"golden"`` for beta.

Top-level layout (``system`` depends on ``kind``)::

    {
      "version": 1,
      "kind": "series" | "fif" | "markov-fif" | "tent",
      "seed": 0,
      "system": { ... },
      "sampling": {"depth": 12, "cap": 6000000, "entropy_n": 20},
      "scales": [0.0625, 0.03125, ...],
      "tolerances": {"eval_eps": 1e-10, "detect_tol": 1e-11},
      "nbern": {"anchor": [2, 2]}
    }

system by kind::

    series      {"phi": "takagi" | "weierstrass" | "piecewise-linear-from-data",
                 "alpha": num, "b": int, "data": {"x": [...], "y": [...]}}
    fif         {"data": {"x": [...], "y": [...]}, "scalings": [...]}
    markov-fif  fif fields plus "ell": [ints], "r": [ints]
    tent        {"beta": num | "golden", "alpha": num}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import InvalidConfig
from .graphs import DataSet, SeriesSpec, fif_system, markov_fif_system
from .tentmap import TentSystem, golden_ratio

CONFIG_VERSION = 1
KINDS = ("series", "fif", "markov-fif", "tent")

DEFAULT_DEPTH = 12
DEFAULT_ENTROPY_N = 20
DEFAULT_EVAL_EPS = 1e-10
DEFAULT_DETECT_TOL = 1e-11
_DEFAULT_CAP = {
    "series": 20_000_000,
    "fif": 6_000_000,
    "markov-fif": 6_000_000,
    "tent": 6_000_000,
}


@dataclass(frozen=True)
class SystemConfig:
    """A validated configuration: the built system plus run settings.

    ``system`` is the owning module's object (SeriesSpec, MarkovFif, or
    TentSystem), already past its own constructor checks.  ``sha256`` is
    the digest of the raw config bytes; every JSON artifact embeds it so
    a report can be traced to the exact file that produced it.
    """

    kind: str
    seed: int
    system: object
    depth: int
    cap: int
    entropy_n: int
    scales: tuple | None
    eval_eps: float
    detect_tol: float
    anchor: tuple | None
    sha256: str


def _fail(path: str, msg: str):
    raise InvalidConfig(f"{path}: {msg}" if path else msg)


def _sub(path: str, key) -> str:
    return f"{path}.{key}" if path else str(key)


def _check_keys(path, obj, allowed, required=()):
    if not isinstance(obj, dict):
        _fail(path, "expected a JSON object")
    for key in obj:
        if key not in allowed:
            _fail(_sub(path, key), f"unknown field (allowed: {', '.join(sorted(allowed))})")
    for key in required:
        if key not in obj:
            _fail(_sub(path, key), "required field is missing")


def _number(path, v, golden=False):
    """A numeric entry: JSON number, 'p/q' string, or (if allowed) 'golden'."""
    if isinstance(v, bool):
        _fail(path, "expected a number, got a boolean")
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, str):
        if v == "golden":
            if golden:
                return golden_ratio()
            _fail(path, "'golden' is only meaningful for the tent beta")
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            _fail(path, f"cannot parse {v!r} as a rational number")
    _fail(path, "expected a number or a 'p/q' string")


def _int(path, v, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, "expected an integer")
    if lo is not None and v < lo:
        _fail(path, f"must be >= {lo}")
    return v


def _float(path, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, "expected a number")
    return float(v)


def _number_list(path, v):
    if not isinstance(v, list) or not v:
        _fail(path, "expected a non-empty list of numbers")
    return tuple(_number(_sub(path, i), x) for i, x in enumerate(v))


def _int_list(path, v):
    if not isinstance(v, list) or not v:
        _fail(path, "expected a non-empty list of integers")
    return tuple(_int(_sub(path, i), x) for i, x in enumerate(v))


def _dataset(path, obj) -> DataSet:
    _check_keys(path, obj, {"x", "y"}, required=("x", "y"))
    xs = _number_list(_sub(path, "x"), obj["x"])
    ys = _number_list(_sub(path, "y"), obj["y"])
    try:
        return DataSet(xs, ys)
    except ValueError as exc:
        _fail(path, str(exc))


def _build_series(path, obj) -> SeriesSpec:
    _check_keys(path, obj, {"phi", "alpha", "b", "data"}, required=("phi", "alpha", "b"))
    phi = obj["phi"]
    data = _dataset(_sub(path, "data"), obj["data"]) if "data" in obj else None
    try:
        return SeriesSpec(
            kind=phi,
            alpha=_number(_sub(path, "alpha"), obj["alpha"]),
            b=_int(_sub(path, "b"), obj["b"]),
            data=data,
        )
    except ValueError as exc:
        _fail(path, str(exc))


def _build_fif(path, obj, markov: bool):
    allowed = {"data", "scalings"} | ({"ell", "r"} if markov else set())
    required = ("data", "scalings") + (("ell", "r") if markov else ())
    _check_keys(path, obj, allowed, required=required)
    data = _dataset(_sub(path, "data"), obj["data"])
    scalings = _number_list(_sub(path, "scalings"), obj["scalings"])
    try:
        if markov:
            return markov_fif_system(
                data,
                scalings,
                ell=_int_list(_sub(path, "ell"), obj["ell"]),
                r=_int_list(_sub(path, "r"), obj["r"]),
            )
        return fif_system(data, scalings)
    except ValueError as exc:
        _fail(path, str(exc))


def _build_tent(path, obj) -> TentSystem:
    _check_keys(path, obj, {"beta", "alpha"}, required=("beta", "alpha"))
    try:
        return TentSystem(
            beta=_number(_sub(path, "beta"), obj["beta"], golden=True),
            alpha=_number(_sub(path, "alpha"), obj["alpha"]),
        )
    except ValueError as exc:
        _fail(path, str(exc))


def _build_system(kind, obj):
    if kind == "series":
        return _build_series("system", obj)
    if kind == "fif":
        return _build_fif("system", obj, markov=False)
    if kind == "markov-fif":
        return _build_fif("system", obj, markov=True)
    return _build_tent("system", obj)


def parse_config(doc, sha256: str = "unhashed") -> SystemConfig:
    """Validate a decoded JSON document and build the system it describes."""
    _check_keys(
        "",
        doc,
        {"version", "kind", "seed", "system", "sampling", "scales", "tolerances", "nbern"},
        required=("version", "kind", "system"),
    )
    version = doc["version"]
    if version != CONFIG_VERSION:
        _fail("version", f"unsupported config version {version!r}; this tool reads version {CONFIG_VERSION}")
    kind = doc["kind"]
    if kind not in KINDS:
        _fail("kind", f"must be one of {', '.join(KINDS)}")
    seed = _int("seed", doc.get("seed", 0), lo=0)

    sampling = doc.get("sampling", {})
    _check_keys("sampling", sampling, {"depth", "cap", "entropy_n"})
    depth = _int("sampling.depth", sampling.get("depth", DEFAULT_DEPTH), lo=1)
    cap = _int("sampling.cap", sampling.get("cap", _DEFAULT_CAP[kind]), lo=1)
    entropy_n = _int("sampling.entropy_n", sampling.get("entropy_n", DEFAULT_ENTROPY_N), lo=1)

    scales = None
    if "scales" in doc:
        raw = doc["scales"]
        if not isinstance(raw, list) or len(raw) < 2:
            _fail("scales", "expected a list of at least two scales, coarse to fine")
        scales = tuple(_float(_sub("scales", i), x) for i, x in enumerate(raw))
        if any(s <= 0 for s in scales):
            _fail("scales", "scales must be positive")

    tolerances = doc.get("tolerances", {})
    _check_keys("tolerances", tolerances, {"eval_eps", "detect_tol"})
    eval_eps = _float("tolerances.eval_eps", tolerances.get("eval_eps", DEFAULT_EVAL_EPS))
    detect_tol = _float("tolerances.detect_tol", tolerances.get("detect_tol", DEFAULT_DETECT_TOL))
    if eval_eps <= 0:
        _fail("tolerances.eval_eps", "must be positive")
    if detect_tol <= 0:
        _fail("tolerances.detect_tol", "must be positive")

    anchor = None
    if "nbern" in doc:
        if kind not in ("fif", "markov-fif"):
            _fail("nbern", "only meaningful for fif and markov-fif configs")
        _check_keys("nbern", doc["nbern"], {"anchor"})
        if "anchor" in doc["nbern"]:
            pair = _int_list("nbern.anchor", doc["nbern"]["anchor"])
            if len(pair) != 2:
                _fail("nbern.anchor", "expected a pair [i, j]")
            anchor = pair

    system = _build_system(kind, doc["system"])
    return SystemConfig(
        kind=kind,
        seed=seed,
        system=system,
        depth=depth,
        cap=cap,
        entropy_n=entropy_n,
        scales=scales,
        eval_eps=eval_eps,
        detect_tol=detect_tol,
        anchor=anchor,
        sha256=sha256,
    )


def load_config(path) -> SystemConfig:
    """Read, hash, and validate a JSON config file."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config file: {exc}") from exc
    try:
        doc = json.loads(blob)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc, sha256=hashlib.sha256(blob).hexdigest())
