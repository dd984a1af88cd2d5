"""Scenario documents (TOML) describing metrics, a Lagrangian, a change and runs.

Example::

    n = 2
    h11 = "1"
    phi = [["1", "0"], ["0", "sin(x1)^2"]]
    lagrangian = "y1^2 + sin(x1)^2*y2^2"     # optional

    [change]                                 # optional
    time = ["2*t", "t/2"]                    # forward, inverse
    space = [["x1", "3*x2"], ["x1", "x2/3"]] # forward, inverse

    [[initial]]
    t0 = 0.0
    x0 = [1.5707963267948966, 0.0]
    v0 = [0.0, 1.0]

    [integrator]
    method = "rk4"                           # or "rk45"
    dt = 1e-3
    t_end = 1.5707963267948966

    [check]
    seed = 0
    random_changes = 10
    points = 2
    tolerance = 1e-7
    box = { t = [-1, 1], x = [[0.5, -1], [2.5, 1]], y = [-1, 1] }
"""

import hashlib
import sys
from dataclasses import dataclass, field

import numpy as np

from .dynamics import RK4, Adaptive
from .errors import ScenarioError
from .jet import JetChange, SpaceChange, TimeChange
from .lagrange import JetLagrangian
from .metrics import SpatialMetric, TemporalMetric

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_TOP_KEYS = {"n", "h11", "phi", "lagrangian", "change", "initial", "integrator", "check", "el"}


@dataclass(frozen=True)
class Initial:
    t0: float
    x0: np.ndarray
    v0: np.ndarray


@dataclass
class CheckSettings:
    seed: int = 0
    random_changes: int = 10
    points: int = 2
    tolerance: float = 1e-7
    box: dict = field(default_factory=dict)
    corrupt: tuple = ()


@dataclass
class ElSettings:
    samples: int = 100
    tolerance: float = 1e-9


@dataclass
class Scenario:
    n: int
    h11: object = None
    phi: object = None
    lagrangian: object = None
    change: object = None
    initial: list = field(default_factory=list)
    stepper: object = field(default_factory=RK4)
    t_end: float = None
    check: CheckSettings = field(default_factory=CheckSettings)
    el: ElSettings = field(default_factory=ElSettings)
    digest: str = ""

    @property
    def has_metrics(self):
        return self.phi is not None

    def temporal_metric(self):
        """``h11``, defaulting to the constant 1."""
        return self.h11 if self.h11 is not None else TemporalMetric.constant(1.0)


def _require(cond, message):
    if not cond:
        raise ScenarioError(message)


def _vector(value, n, what):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{what} must be a list of {n} numbers") from None
    _require(arr.shape == (n,), f"{what} must have length {n}")
    _require(bool(np.all(np.isfinite(arr))), f"{what} must be finite")
    return arr


def _range(value, n, what):
    """A box edge pair ``[lo, hi]``; each side a number or a length-n list."""
    _require(isinstance(value, list) and len(value) == 2, f"{what} must be [low, high]")
    lo, hi = (np.array(v, dtype=float) for v in value)
    _require(lo.shape in ((), (n,)) and hi.shape in ((), (n,)), f"{what} bounds have bad shape")
    _require(bool(np.all(lo < hi)), f"{what} needs low < high")
    return lo, hi


def _string_list(value, n, what):
    _require(isinstance(value, list) and len(value) == n and all(isinstance(s, str) for s in value),
             f"{what} must be a list of {n} expression strings")
    return value


def _parse_change(doc, n):
    _require(isinstance(doc, dict), "[change] must be a table")
    unknown = set(doc) - {"time", "space"}
    _require(not unknown, f"unknown keys in [change]: {sorted(unknown)}")
    time = TimeChange.identity()
    space = SpaceChange.identity(n)
    if "time" in doc:
        fwd, inv = _string_list(doc["time"], 2, "change.time")
        time = TimeChange.from_expressions(fwd, inv)
    if "space" in doc:
        pair = doc["space"]
        _require(isinstance(pair, list) and len(pair) == 2, "change.space must be [forward, inverse]")
        fwd = _string_list(pair[0], n, "change.space forward")
        inv = _string_list(pair[1], n, "change.space inverse")
        space = SpaceChange.from_expressions(fwd, inv)
    return JetChange(time, space)


def _parse_integrator(doc):
    _require(isinstance(doc, dict), "[integrator] must be a table")
    method = doc.get("method", "rk4")
    t_end = doc.get("t_end")
    _require(t_end is not None, "integrator.t_end is required")
    try:
        if method == "rk4":
            stepper = RK4(float(doc.get("dt", 1e-3)))
        elif method == "rk45":
            stepper = Adaptive(float(doc.get("rtol", 1e-9)), float(doc.get("atol", 1e-12)))
        else:
            raise ScenarioError(f"unknown integrator method {method!r}")
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return stepper, float(t_end)


def _parse_check(doc, n):
    _require(isinstance(doc, dict), "[check] must be a table")
    s = CheckSettings()
    for key in ("seed", "random_changes", "points"):
        if key in doc:
            _require(isinstance(doc[key], int) and doc[key] >= 0, f"check.{key} must be a non-negative integer")
            setattr(s, key, doc[key])
    if "tolerance" in doc:
        s.tolerance = float(doc["tolerance"])
        _require(s.tolerance > 0, "check.tolerance must be positive")
    if "box" in doc:
        box = doc["box"]
        _require(isinstance(box, dict) and set(box) <= {"t", "x", "y"}, "check.box keys are t, x, y")
        s.box = {k: _range(v, 1 if k == "t" else n, f"check.box.{k}") for k, v in box.items()}
        if "t" in s.box:
            s.box["t"] = tuple(float(v) for v in s.box["t"])
    if "corrupt" in doc:
        s.corrupt = tuple(doc["corrupt"])
    return s


def _parse_el(doc):
    _require(isinstance(doc, dict), "[el] must be a table")
    s = ElSettings()
    if "samples" in doc:
        _require(isinstance(doc["samples"], int) and doc["samples"] > 0, "el.samples must be positive")
        s.samples = doc["samples"]
    if "tolerance" in doc:
        s.tolerance = float(doc["tolerance"])
    return s


def parse_scenario(text, digest=None):
    """Build a :class:`Scenario` from TOML text."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"invalid TOML: {exc}") from None
    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, f"unknown top-level keys: {sorted(unknown)}")
    n = doc.get("n")
    _require(isinstance(n, int) and n >= 1, "n must be a positive integer")
    sc = Scenario(n=n, digest=digest or hashlib.sha256(text.encode()).hexdigest())
    if "h11" in doc:
        _require(isinstance(doc["h11"], str), "h11 must be an expression string")
        sc.h11 = TemporalMetric.from_expression(doc["h11"])
    if "phi" in doc:
        rows = doc["phi"]
        _require(isinstance(rows, list) and all(isinstance(r, list) for r in rows), "phi must be a matrix of strings")
        for r in rows:
            _string_list(r, n, "phi row")
        sc.phi = SpatialMetric.from_expressions(rows, n)
    if "lagrangian" in doc:
        _require(isinstance(doc["lagrangian"], str), "lagrangian must be an expression string")
        sc.lagrangian = JetLagrangian.from_expression(doc["lagrangian"], n)
    if "change" in doc:
        sc.change = _parse_change(doc["change"], n)
    for k, init in enumerate(doc.get("initial", [])):
        _require(isinstance(init, dict), "[[initial]] entries must be tables")
        sc.initial.append(Initial(float(init.get("t0", 0.0)),
                                  _vector(init.get("x0"), n, f"initial[{k}].x0"),
                                  _vector(init.get("v0"), n, f"initial[{k}].v0")))
    if "integrator" in doc:
        sc.stepper, sc.t_end = _parse_integrator(doc["integrator"])
    if "check" in doc:
        sc.check = _parse_check(doc["check"], n)
    if "el" in doc:
        sc.el = _parse_el(doc["el"])
    return sc


def load_scenario(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ScenarioError(f"{path} is not UTF-8") from None
    return parse_scenario(text, hashlib.sha256(raw).hexdigest())
