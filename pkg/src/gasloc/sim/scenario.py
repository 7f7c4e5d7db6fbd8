"""Scenario files: YAML with unit-suffixed keys, validated into frozen records.

Schema (every section is optional unless marked)::

    name: text
    seed: int                        # master seed, overridable with --seed
    trials: int                      # >= 1
    radio:      {fc_hz, ptx_dbm, c_db, pathloss_exponent, d0_m}      # all required if present
    shadowing:  {preset: urban} | {a_los_db, b_los_per_rad, a_nlos_db, b_nlos_per_rad,
                 plos: {model: logistic, alpha, beta} | {model: constant, value}}
    anchors:    - {kind: ground, position_m: [x, y, z], attitude_deg: [p, r, y]}
                - {kind: uav, waypoints_m: [[...], ...], durations_s: [...],
                   placement_error: {eps_d_m, eps_r_m, eps_h_m}}
    targets:    - {position_m: [x, y, z]}
    target_prior: {kind: disc, center_m: [x, y], radius_m, altitude_m: [lo, hi]}
    measurement: {kind: toa|tdoa|rss|aoa|hybrid, sigma_m, sigma_rad, nlos_bias_m,
                  nlos_probability, reference_anchor}
    # anchors, targets/target_prior, measurement and trials are required unless
    # the file only drives pipelines (doppler, trajopt, gdop_map, altitude_sweep)
    estimator:  {multistart, max_iterations, tolerance_m, prefer_upper}
    altitude_sweep, gdop_map, doppler, trajopt: pipeline sections (see README)

Quantities accept any unit of the right dimension (``_km``, ``_deg`` ...) and
are converted to SI. Unknown keys, missing fields and dimension mismatches are
errors that name the offending key.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..anchors.trajectory import PlacementError, Trajectory
from ..errors import ConfigurationError, ScenarioError, UnitError
from ..radio import LosProbability, RadioConfig, ShadowingParams, load_shadowing_presets
from .units import UNITS, convert, split_key

_REQUIRED = object()
MEASUREMENT_KINDS = ("toa", "tdoa", "rss", "aoa", "hybrid")


class _Section:
    """Consumes keys from one mapping; ``done`` rejects leftovers."""

    def __init__(self, data, path: str):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ScenarioError(f"{path}: expected a mapping")
        self.data = data
        self.path = path
        self.used = set()

    def _find(self, base: str):
        hits = [k for k in self.data if split_key(k)[0] == base or k == base]
        if len(hits) > 1:
            raise ScenarioError(f"{self.path}: '{base}' given more than once ({', '.join(hits)})")
        return hits[0] if hits else None

    def has(self, base: str) -> bool:
        return self._find(base) is not None

    def quantity(self, base: str, dim: str, default=_REQUIRED):
        key = self._find(base)
        if key is None:
            if default is _REQUIRED:
                raise ScenarioError(f"{self.path}.{base}: missing required field")
            return default
        self.used.add(key)
        _, suf = split_key(key)
        if suf is None:
            raise UnitError(f"{self.path}.{key}: physical quantity needs a unit suffix")
        if UNITS[suf][0] != dim:
            raise UnitError(f"{self.path}.{key}: unit '{suf}' is {UNITS[suf][0]}, expected {dim}")
        try:
            return convert(self.data[key], suf)
        except (TypeError, ValueError):
            raise ScenarioError(f"{self.path}.{key}: not numeric") from None

    def value(self, name: str, kind=float, default=_REQUIRED):
        if name not in self.data:
            key = self._find(name)
            if key is not None and key != name:
                raise UnitError(f"{self.path}.{key}: '{name}' is dimensionless, drop the suffix")
            if default is _REQUIRED:
                raise ScenarioError(f"{self.path}.{name}: missing required field")
            return default
        self.used.add(name)
        raw = self.data[name]
        try:
            if kind is bool:
                if not isinstance(raw, bool):
                    raise TypeError
                return raw
            if kind is int:
                if isinstance(raw, bool) or int(raw) != raw:
                    raise TypeError
                return int(raw)
            return kind(raw)
        except (TypeError, ValueError):
            raise ScenarioError(f"{self.path}.{name}: expected {kind.__name__}") from None

    def section(self, name: str, required: bool = False):
        if name not in self.data:
            if required:
                raise ScenarioError(f"{self.path}.{name}: missing required section")
            return None
        self.used.add(name)
        return _Section(self.data[name], f"{self.path}.{name}")

    def items(self, name: str, required: bool = False):
        if name not in self.data:
            if required:
                raise ScenarioError(f"{self.path}.{name}: missing required list")
            return []
        self.used.add(name)
        raw = self.data[name]
        if not isinstance(raw, list):
            raise ScenarioError(f"{self.path}.{name}: expected a list")
        return [_Section(item, f"{self.path}.{name}[{i}]") for i, item in enumerate(raw)]

    def done(self):
        extra = [k for k in self.data if k not in self.used]
        if extra:
            raise ScenarioError(f"{self.path}.{extra[0]}: unknown key")


def _vec(sec: _Section, base: str, n: int, dim: str = "length", default=_REQUIRED):
    v = sec.quantity(base, dim, default)
    if v is default and default is not _REQUIRED:
        return v
    if not isinstance(v, list) or len(v) != n:
        raise ScenarioError(f"{sec.path}.{base}: expected a list of {n} numbers")
    return tuple(v)


@dataclass(frozen=True)
class AnchorModel:
    kind: str  # ground | uav
    position: tuple  # nominal position (first hover point for uav)
    attitude: tuple = (0.0, 0.0, 0.0)  # pitch, roll, yaw in rad
    waypoints: tuple | None = None
    durations: tuple | None = None
    placement: PlacementError = PlacementError()

    @property
    def trajectory(self) -> Trajectory | None:
        if self.waypoints is None:
            return None
        return Trajectory(self.waypoints, self.durations)

    def nominal_points(self) -> list[tuple]:
        """Anchor positions used by the estimator; every uav hover point is a virtual anchor."""
        if self.kind != "uav":
            return [self.position]
        hovers = self.trajectory.hover_points()
        return [tuple(float(c) for c in p) for p, _ in hovers] or [self.position]


@dataclass(frozen=True)
class TargetPrior:
    center: tuple = (0.0, 0.0)
    radius: float = 1000.0
    altitude: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class MeasurementPlan:
    kind: str
    sigma_m: float = 0.0
    sigma_rad: float = 0.0
    nlos_bias_m: float = 0.0
    nlos_probability: float = 0.0
    reference_anchor: int = 0


@dataclass(frozen=True)
class EstimatorSettings:
    multistart: int = 8
    max_iterations: int = 100
    tolerance_m: float = 1e-9
    prefer_upper: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    trials: int
    seed: int
    anchors: tuple
    targets: tuple  # explicit target positions, may be empty when a prior is given
    prior: TargetPrior | None
    measurement: MeasurementPlan | None
    estimator: EstimatorSettings = EstimatorSettings()
    radio: RadioConfig | None = None
    shadowing: ShadowingParams | None = None
    pipelines: dict = field(default_factory=dict, compare=False, hash=False)
    pipelines_key: str = ""  # canonical JSON of ``pipelines`` so equality covers it

    def with_overrides(self, seed=None, trials=None) -> "Scenario":
        from dataclasses import replace

        out = self
        if seed is not None:
            out = replace(out, seed=int(seed))
        if trials is not None:
            if trials < 1:
                raise ConfigurationError("trial count must be >= 1")
            out = replace(out, trials=int(trials))
        return out

    def resolved(self) -> dict:
        """Config echo with every value in SI units."""
        d = asdict(self)
        d.pop("pipelines_key")
        d["pipelines"] = json.loads(self.pipelines_key) if self.pipelines_key else {}
        return _jsonable(d)

    def config_hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "tolist"):
        return x.tolist()
    if hasattr(x, "value") and hasattr(x, "name"):
        return x.value
    return x


def _radio(sec: _Section) -> RadioConfig:
    cfg = RadioConfig(
        fc_hz=sec.quantity("fc", "frequency"),
        ptx_dbm=sec.quantity("ptx", "power_dbm"),
        c_db=sec.quantity("c", "level_db"),
        pathloss_exponent=sec.value("pathloss_exponent"),
        d0_m=sec.quantity("d0", "length"),
        bandwidth_hz=sec.quantity("bandwidth", "frequency", RadioConfig.bandwidth_hz),
    )
    sec.done()
    return cfg


def _plos(sec: _Section) -> LosProbability:
    model = sec.value("model", str)
    if model == "logistic":
        p = LosProbability("logistic", alpha=sec.value("alpha"), beta=sec.value("beta"))
    elif model == "constant":
        p = LosProbability("constant", value=sec.value("value"))
    else:
        raise ScenarioError(f"{sec.path}.model: unknown LOS model {model!r}")
    sec.done()
    return p


def _shadow_fields(sec: _Section) -> ShadowingParams:
    plos = sec.section("plos", required=True)
    out = ShadowingParams(
        a_los_db=sec.quantity("a_los", "level_db"),
        b_los=sec.quantity("b_los", "per_angle"),
        a_nlos_db=sec.quantity("a_nlos", "level_db"),
        b_nlos=sec.quantity("b_nlos", "per_angle"),
        plos=_plos(plos),
    )
    sec.done()
    return out


def _shadowing(sec: _Section) -> ShadowingParams:
    if "preset" in sec.data:
        name = sec.value("preset", str)
        sec.done()
        presets = load_shadowing_presets()
        if name not in presets:
            raise ScenarioError(f"{sec.path}.preset: unknown preset {name!r}; have {sorted(presets)}")
        return presets[name]
    return _shadow_fields(sec)


def _placement(sec: _Section | None) -> PlacementError:
    if sec is None:
        return PlacementError()
    e = PlacementError(sec.quantity("eps_d", "length", 0.0), sec.quantity("eps_r", "length", 0.0),
                       sec.quantity("eps_h", "length", 0.0))
    sec.done()
    return e


def _anchor(sec: _Section) -> AnchorModel:
    kind = sec.value("kind", str)
    att = _vec(sec, "attitude", 3, "angle", (0.0, 0.0, 0.0))
    placement = _placement(sec.section("placement_error"))
    if kind == "ground":
        a = AnchorModel("ground", _vec(sec, "position", 3), att, placement=placement)
    elif kind == "uav":
        if sec.has("position"):
            p = _vec(sec, "position", 3)
            wps, durs = (p, p), (1.0,)
        else:
            raw = sec.quantity("waypoints", "length")
            if not isinstance(raw, list) or not all(isinstance(w, list) and len(w) == 3 for w in raw):
                raise ScenarioError(f"{sec.path}.waypoints: expected a list of [x, y, z]")
            wps = tuple(tuple(w) for w in raw)
            durs = tuple(sec.quantity("durations", "time"))
        try:
            Trajectory(wps, durs)
        except ConfigurationError as exc:
            raise ScenarioError(f"{sec.path}: {exc}") from None
        a = AnchorModel("uav", wps[0], att, wps, durs, placement)
    else:
        raise ScenarioError(f"{sec.path}.kind: unknown anchor kind {kind!r}")
    sec.done()
    return a


def _measurement(sec: _Section) -> MeasurementPlan:
    kind = sec.value("kind", str)
    if kind not in MEASUREMENT_KINDS:
        raise ScenarioError(f"{sec.path}.kind: expected one of {MEASUREMENT_KINDS}")
    plan = MeasurementPlan(
        kind,
        sigma_m=sec.quantity("sigma", "length", 0.0),
        sigma_rad=sec.quantity("sigma_angle", "angle", 0.0),
        nlos_bias_m=sec.quantity("nlos_bias", "length", 0.0),
        nlos_probability=sec.value("nlos_probability", float, 0.0),
        reference_anchor=sec.value("reference_anchor", int, 0),
    )
    sec.done()
    if plan.sigma_m < 0 or plan.sigma_rad < 0 or not 0 <= plan.nlos_probability <= 1:
        raise ScenarioError(f"{sec.path}: noise levels must be >= 0 and probabilities in [0, 1]")
    return plan


# pipeline sections: schema of (name, kind, dim-or-type, default)
_PIPELINE_SCHEMA = {
    "altitude_sweep": [
        ("altitudes", "range", "length", _REQUIRED),
        ("disc_radius", "q", "length", 1000.0),
        ("samples_per_altitude", "v", int, 20000),
        ("target_altitude", "q", "length", 0.0),
    ],
    "gdop_map": [
        ("x", "range", "length", _REQUIRED),
        ("y", "range", "length", _REQUIRED),
        ("z", "range", "length", _REQUIRED),
        ("kind", "v", str, "range"),
        ("reference_anchor", "v", int, 0),
    ],
    "doppler": [
        ("fc", "q", "frequency", _REQUIRED),
        ("altitude", "q", "length", 550.0e3),
        ("max_elevations", "q", "angle", None),
        ("tle_file", "v", str, None),
        ("user_latitude", "q", "angle", 0.0),
        ("user_longitude", "q", "angle", 0.0),
        ("span", "q", "time", 900.0),
        ("step", "q", "time", 1.0),
        ("mask", "q", "angle", math.radians(10.0)),
    ],
    "trajopt": [
        ("objective", "v", str, "crlb_trace"),
        ("measurement", "v", str, "toa"),
        ("waypoints", "v", int, 1),
        ("total_dwell", "q", "time", 60.0),
        ("sigma_range", "q", "length", 1.0),
        ("bounds_lo", "q", "length", _REQUIRED),
        ("bounds_hi", "q", "length", _REQUIRED),
        ("hover_power", "q", "power", 0.0),
        ("move_cost", "q", "energy_per_length", 0.0),
        ("energy_budget", "q", "energy", math.inf),
        ("cruise_speed", "q", "speed", 10.0),
        ("max_speed", "q", "speed", math.inf),
        ("max_heading_change", "q", "angle", None),
        ("min_dwell", "q", "time", 0.0),
        ("coverage_radius", "q", "length", None),
        ("iterations", "v", int, 3000),
        ("chains", "v", int, 2),
        ("mc_trials", "v", int, 200),
    ],
}


def _range_spec(sec: _Section, base: str, dim: str):
    """A list of values, or a mapping {start_*, stop_*, step_*} expanded inclusively."""
    if isinstance(sec.data.get(base), dict):
        sub = sec.section(base)
        start = sub.quantity("start", dim)
        stop = sub.quantity("stop", dim)
        step = sub.quantity("step", dim)
        sub.done()
        if not step > 0 or stop < start:
            raise ScenarioError(f"{sub.path}: need step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(n)]
    v = sec.quantity(base, dim)
    return v if isinstance(v, list) else [v]


def _pipeline(sec: _Section, name: str) -> dict:
    out = {}
    for field_name, kind, spec, default in _PIPELINE_SCHEMA[name]:
        if kind == "range":
            if default is _REQUIRED or sec.has(field_name):
                out[field_name] = _range_spec(sec, field_name, spec)
        elif kind == "q":
            out[field_name] = sec.quantity(field_name, spec, default)
        else:
            out[field_name] = sec.value(field_name, spec, default)
    sec.done()
    return out


def parse_scenario(data, origin: str = "scenario") -> Scenario:
    root = _Section(data, origin)
    name = root.value("name", str, "unnamed")
    has_plan = "measurement" in root.data
    trials = root.value("trials", int) if has_plan else root.value("trials", int, 1)
    seed = root.value("seed", int, 0)
    if trials < 1:
        raise ScenarioError(f"{origin}.trials: must be >= 1")
    if seed < 0 or seed >= 2**64:
        raise ScenarioError(f"{origin}.seed: must be an unsigned 64-bit integer")
    radio_sec = root.section("radio")
    radio = _radio(radio_sec) if radio_sec else None
    shadow_sec = root.section("shadowing")
    shadowing = _shadowing(shadow_sec) if shadow_sec else None
    anchors = tuple(_anchor(a) for a in root.items("anchors", required=has_plan))
    targets = []
    for t in root.items("targets"):
        targets.append(_vec(t, "position", 3))
        t.done()
    prior = None
    psec = root.section("target_prior")
    if psec is not None:
        kind = psec.value("kind", str, "disc")
        if kind != "disc":
            raise ScenarioError(f"{psec.path}.kind: only 'disc' priors are supported")
        prior = TargetPrior(_vec(psec, "center", 2, default=(0.0, 0.0)),
                            psec.quantity("radius", "length", 1000.0),
                            _vec(psec, "altitude", 2, default=(0.0, 0.0)))
        psec.done()
        if prior.radius < 0 or prior.altitude[1] < prior.altitude[0]:
            raise ScenarioError(f"{psec.path}: invalid disc prior")
    plan_sec = root.section("measurement")
    measurement = _measurement(plan_sec) if plan_sec is not None else None
    est_sec = root.section("estimator")
    estimator = EstimatorSettings()
    if est_sec is not None:
        estimator = EstimatorSettings(
            multistart=est_sec.value("multistart", int, 8),
            max_iterations=est_sec.value("max_iterations", int, 100),
            tolerance_m=est_sec.quantity("tolerance", "length", 1e-9),
            prefer_upper=est_sec.value("prefer_upper", bool, False),
        )
        est_sec.done()
    pipelines = {}
    for pname in _PIPELINE_SCHEMA:
        psec = root.section(pname)
        if psec is not None:
            pipelines[pname] = _pipeline(psec, pname)
    root.done()

    if not pipelines and not has_plan:
        raise ScenarioError(f"{origin}.measurement: missing required section")
    if has_plan:
        # a localization scenario; pipeline-only files (doppler, trajopt) may omit these
        if not anchors:
            raise ScenarioError(f"{origin}.anchors: at least one anchor is required")
        if not targets and prior is None:
            raise ScenarioError(f"{origin}: need 'targets' or 'target_prior'")
        if measurement.kind == "rss" and (radio is None or shadowing is None):
            field_name = "radio" if radio is None else "shadowing"
            raise ScenarioError(f"{origin}.{field_name}: required by the rss measurement plan")
        if not 0 <= measurement.reference_anchor < len(anchors):
            raise ScenarioError(f"{origin}.measurement.reference_anchor: out of range")
    return Scenario(
        name=name, trials=trials, seed=seed, anchors=anchors, targets=tuple(targets),
        prior=prior, measurement=measurement, estimator=estimator, radio=radio,
        shadowing=shadowing, pipelines=pipelines,
        pipelines_key=json.dumps(_jsonable(pipelines), sort_keys=True, default=str),
    )


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError:
        raise  # surfaced by the CLI as an I/O error
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{p.name}: not valid YAML ({exc.__class__.__name__})") from None
    return parse_scenario(data, p.stem)
