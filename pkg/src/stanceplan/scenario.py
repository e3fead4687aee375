"""Scenario files: YAML with line-aware validation.

Grammar (every section but ``targets`` is optional)::

    seed: 0
    start: [x, y]
    end: [x, y]                # defaults to start
    targets:
      - {id: 1, position: [x, y, z], approach_yaw: null}
    arm: {shoulder_height: 1.3, l1: 0.35, l2: 0.35, d_floor: 0.25}
    obstacles:
      - footprint: [[[x, y], ...], [[x, y], ...]]   # exterior ring, then holes
        clearance: 0.1
    planner: {alpha: null, lambda: null, v: null, r_min_tolerance: 0.05,
              n_samples: 10000, alpha_hull: 0.1, time_budget: 30.0}
    gait: {v_max: [0.4, 0.2], pid: [100, 0, 0], dt: 0.01, ...}
    timing: {t_stop: 8.0, t_scan: 5.0}

``planner.alpha: null`` means ``t_stop``; ``planner.v: null`` means the gait's
nominal speed; ``planner.lambda: null`` means a tenth of alpha.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ParseError, StancePlanError, ValidationError
from .execution_sim import GaitParams
from .geometry import Point2, Polygon2
from .planner.problem import LAMBDA_FRACTION, R_MIN_TOLERANCE
from .planner.search import DEFAULT_TIME_BUDGET
from .reachability import DEFAULT_SAMPLES, ArmModel, Obstacle, TargetPose

DEFAULT_ALPHA_HULL = 0.1


@dataclass(frozen=True)
class PlannerParams:
    alpha: float | None = None
    lam: float | None = None
    v: float | None = None
    r_min_tolerance: float = R_MIN_TOLERANCE
    n_samples: int = DEFAULT_SAMPLES
    alpha_hull: float = DEFAULT_ALPHA_HULL
    time_budget: float = DEFAULT_TIME_BUDGET


@dataclass(frozen=True)
class Timing:
    t_stop: float = 8.0
    t_scan: float = 5.0


@dataclass(frozen=True)
class Scenario:
    targets: tuple[TargetPose, ...]
    start: Point2 = Point2(0.0, 0.0)
    end: Point2 | None = None
    seed: int = 0
    arm: ArmModel = ArmModel()
    obstacles: tuple[Obstacle, ...] = ()
    planner: PlannerParams = PlannerParams()
    gait: GaitParams = GaitParams()
    timing: Timing = Timing()
    naive_order: tuple[int, ...] | None = None
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def goal(self) -> Point2:
        return self.start if self.end is None else self.end

    @property
    def alpha(self) -> float:
        return self.timing.t_stop if self.planner.alpha is None else self.planner.alpha

    @property
    def lam(self) -> float:
        return LAMBDA_FRACTION * self.alpha if self.planner.lam is None else self.planner.lam

    @property
    def walk_speed(self) -> float:
        return self.gait.v_nominal if self.planner.v is None else self.planner.v

    @property
    def target_order(self) -> tuple[int, ...]:
        return self.naive_order if self.naive_order is not None else tuple(t.id for t in self.targets)


# ------------------------------------------------------------------ yaml with line numbers


class _Map(dict):
    lines: dict


class _Seq(list):
    lines: list


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_map(loader, node):
    loader.flatten_mapping(node)
    out = _Map()
    out.lines = {}
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        out[key] = loader.construct_object(value_node, deep=True)
        out.lines[key] = key_node.start_mark.line + 1
    return out


def _construct_seq(loader, node):
    out = _Seq(loader.construct_object(n, deep=True) for n in node.value)
    out.lines = [n.start_mark.line + 1 for n in node.value]
    return out


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_map)
_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_seq)


def _line(container, key) -> int | None:
    lines = getattr(container, "lines", None)
    if lines is None:
        return None
    if isinstance(lines, dict):
        return lines.get(key)
    return lines[key] if 0 <= key < len(lines) else None


class _Reader:
    """Typed accessors that raise ValidationError with the field path and line."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ValidationError(path or "<root>", "expected a mapping", None)
        self.data = data
        self.path = path
        self.seen: set[str] = set()

    def _name(self, key) -> str:
        return f"{self.path}.{key}" if self.path else str(key)

    def fail(self, key, reason: str):
        raise ValidationError(self._name(key), reason, _line(self.data, key))

    def has(self, key) -> bool:
        return key in self.data

    def raw(self, key, default=None):
        self.seen.add(key)
        return self.data.get(key, default)

    def number(self, key, default=None, *, positive=False, nonneg=False, allow_none=False):
        v = self.raw(key, default)
        if v is None:
            if allow_none:
                return None
            self.fail(key, "missing required number")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(key, f"expected a finite number, got {v!r}")
        if positive and not v > 0:
            self.fail(key, f"must be positive, got {v}")
        if nonneg and v < 0:
            self.fail(key, f"must be non-negative, got {v}")
        return float(v)

    def integer(self, key, default=None):
        v = self.raw(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(key, f"expected an integer, got {v!r}")
        return int(v)

    def vector(self, key, n: int, default=None, allow_none=False):
        v = self.raw(key, default)
        if v is None and allow_none:
            return None
        if not isinstance(v, (list, tuple)) or len(v) != n:
            self.fail(key, f"expected a list of {n} numbers, got {v!r}")
        for x in v:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                self.fail(key, f"expected a list of {n} finite numbers, got {v!r}")
        return tuple(float(x) for x in v)

    def sub(self, key) -> "_Reader":
        v = self.raw(key, {})
        if not isinstance(v, dict):
            self.fail(key, "expected a mapping")
        r = _Reader(v, self._name(key))
        return r

    def items(self, key) -> list[tuple[Any, int | None, str]]:
        v = self.raw(key, [])
        if not isinstance(v, list):
            self.fail(key, "expected a list")
        return [(x, _line(v, i), f"{self._name(key)}[{i}]") for i, x in enumerate(v)]

    def finish(self):
        for key in self.data:
            if key not in self.seen:
                self.fail(key, "unknown field")


def _guard(name: str, line: int | None, fn, *args, **kw):
    """Run a constructor, converting its own validation errors into a ValidationError."""
    try:
        return fn(*args, **kw)
    except ValidationError:
        raise
    except (StancePlanError, ValueError, TypeError) as exc:
        raise ValidationError(name, str(exc), line) from exc


def _parse_target(item, line, name) -> TargetPose:
    if not isinstance(item, dict):
        raise ValidationError(name, "expected a mapping with id and position", line)
    r = _Reader(item, name)
    tid = r.integer("id")
    pos = r.vector("position", 3)
    yaw = r.number("approach_yaw", allow_none=True)
    r.finish()
    return _guard(name, line, TargetPose, tid, pos, yaw)


def _parse_obstacle(item, line, name) -> Obstacle:
    if not isinstance(item, dict):
        raise ValidationError(name, "expected a mapping with footprint", line)
    r = _Reader(item, name)
    rings = r.raw("footprint")
    if not isinstance(rings, list) or not rings:
        r.fail("footprint", "expected a list of rings")
    clearance = r.number("clearance", 0.0, nonneg=True)
    r.finish()
    poly = _guard(f"{name}.footprint", _line(item, "footprint"), Polygon2.from_rings, rings)
    return _guard(name, line, Obstacle, poly, clearance)


def _gait_from(r: _Reader) -> GaitParams:
    base = GaitParams()
    kw: dict[str, Any] = {}
    for f in dataclasses.fields(GaitParams):
        if not r.has(f.name):
            continue
        default = getattr(base, f.name)
        if isinstance(default, tuple):
            kw[f.name] = r.vector(f.name, len(default))
        elif isinstance(default, int) and not isinstance(default, bool):
            kw[f.name] = r.integer(f.name)
        else:
            kw[f.name] = r.number(f.name)
    r.finish()
    return _guard(r.path, None, GaitParams, **kw)


def scenario_from_dict(data) -> Scenario:
    root = _Reader(data, "")
    seed = root.integer("seed", 0)
    name = root.raw("name", "")
    if not isinstance(name, str):
        root.fail("name", "expected a string")
    start = Point2(*root.vector("start", 2, (0.0, 0.0)))
    end = root.vector("end", 2, allow_none=True)
    end = Point2(*end) if end is not None else None

    targets = [_parse_target(*it) for it in root.items("targets")]
    if not targets:
        root.fail("targets", "at least one target is required")
    seen: dict[int, int] = {}
    for k, t in enumerate(targets):
        if t.id in seen:
            raise ValidationError(f"targets[{k}].id", f"duplicate target id {t.id}", _line(data["targets"], k))
        seen[t.id] = k

    a = root.sub("arm")
    defaults = ArmModel()
    arm = _guard(
        "arm",
        _line(data, "arm"),
        ArmModel,
        a.number("shoulder_height", defaults.shoulder_height, positive=True),
        a.number("l1", defaults.l1, positive=True),
        a.number("l2", defaults.l2, positive=True),
        a.number("d_floor", defaults.d_floor, nonneg=True),
    )
    a.finish()

    obstacles = tuple(_parse_obstacle(*it) for it in root.items("obstacles"))

    p = root.sub("planner")
    pd = PlannerParams()
    planner = PlannerParams(
        alpha=p.number("alpha", None, nonneg=True, allow_none=True),
        lam=p.number("lambda", None, nonneg=True, allow_none=True),
        v=p.number("v", None, positive=True, allow_none=True),
        r_min_tolerance=p.number("r_min_tolerance", pd.r_min_tolerance, positive=True),
        n_samples=p.integer("n_samples", pd.n_samples),
        alpha_hull=p.number("alpha_hull", pd.alpha_hull, positive=True),
        time_budget=p.number("time_budget", pd.time_budget, positive=True),
    )
    if planner.n_samples <= 0:
        p.fail("n_samples", "must be positive")
    p.finish()

    tm = root.sub("timing")
    timing = Timing(tm.number("t_stop", 8.0, nonneg=True), tm.number("t_scan", 5.0, nonneg=True))
    tm.finish()

    gait = _gait_from(root.sub("gait"))

    naive = root.raw("naive_order")
    if naive is not None:
        if not isinstance(naive, list) or sorted(naive) != sorted(seen) or len(set(naive)) != len(naive):
            root.fail("naive_order", "must list every target id exactly once")
        naive = tuple(int(x) for x in naive)
    root.finish()

    scn = Scenario(tuple(targets), start, end, seed, arm, obstacles, planner, gait, timing, naive, name)
    if gait.switch_distance <= planner.r_min_tolerance:
        raise ValidationError("gait.switch_distance", "must exceed planner.r_min_tolerance", _line(data, "gait"))
    lam, alpha = scn.lam, scn.alpha
    if lam > alpha:
        raise ValidationError("planner.lambda", f"must not exceed alpha ({alpha})", _line(data, "planner"))
    return scn


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        data = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return scenario_from_dict(data)


def scenario_to_dict(scn: Scenario) -> dict:
    out: dict[str, Any] = {}
    if scn.name:
        out["name"] = scn.name
    out["seed"] = scn.seed
    out["start"] = list(scn.start)
    out["end"] = list(scn.end) if scn.end is not None else None
    out["targets"] = [
        {"id": t.id, "position": [float(v) for v in t.position], "approach_yaw": t.approach_yaw} for t in scn.targets
    ]
    out["arm"] = dataclasses.asdict(scn.arm)
    out["obstacles"] = [{"footprint": o.footprint.to_rings(), "clearance": o.clearance} for o in scn.obstacles]
    p = scn.planner
    out["planner"] = {
        "alpha": p.alpha,
        "lambda": p.lam,
        "v": p.v,
        "r_min_tolerance": p.r_min_tolerance,
        "n_samples": p.n_samples,
        "alpha_hull": p.alpha_hull,
        "time_budget": p.time_budget,
    }
    out["gait"] = {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(scn.gait).items()}
    out["timing"] = dataclasses.asdict(scn.timing)
    if scn.naive_order is not None:
        out["naive_order"] = list(scn.naive_order)
    return out


class _FlowDumper(yaml.SafeDumper):
    pass


def _represent_list(dumper, data):
    # short numeric lists read better inline
    flow = all(isinstance(x, (int, float)) for x in data) or (
        bool(data) and all(isinstance(x, list) for x in data) and all(
            isinstance(y, (int, float, list)) for x in data for y in x
        )
    )
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_FlowDumper.add_representer(list, _represent_list)


def dump_scenario(scn: Scenario) -> str:
    return yaml.dump(scenario_to_dict(scn), Dumper=_FlowDumper, sort_keys=False, width=120)


def save_scenario(scn: Scenario, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_scenario(scn))
    return path
