"""Scenario files: one structured document aggregating every knob the
library exposes, parsed into the validated domain types.

The file format is YAML with one nesting level per subsystem (array,
jitter, fading, link, mc, approximation).  Every parse failure carries
the dotted field path of the offending entry.  Angles accept an explicit
"deg" suffix, powers accept "dB", "dBm", or "dBW"; bare numbers mean
radians and watts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import yaml

from .antenna import ArrayConfig, LobeModel, fit_lobe_model
from .channel import DEFAULT_CHANNEL_LN_ORDER, AlphaMuParams, ChannelModel, LinkBudget
from .errors import DomainError, ScenarioError
from .montecarlo import McConfig
from .pointing import DEFAULT_LN_APPROX_ORDER, JitterParams, PointingModel

APPROXIMATION_MODES = ("exact", "lemma1")
LOBE_FIT_MODES = ("exact-fit", "closed-form-approx")


def parse_quantity(value, path: str, kind: str = "plain") -> float:
    """A number, or a string with a unit suffix.

    kind "angle" accepts "deg"; kind "power" accepts "dB", "dBm", "dBW".
    Bare numbers pass through (radians / watts / dimensionless).
    """
    if isinstance(value, bool):
        raise ScenarioError(f"{path}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        parts = value.split()
        try:
            num = float(parts[0])
        except (ValueError, IndexError):
            raise ScenarioError(f"{path}: cannot parse quantity {value!r}")
        if len(parts) == 1:
            return num
        if len(parts) != 2:
            raise ScenarioError(f"{path}: cannot parse quantity {value!r}")
        unit = parts[1]
        if kind == "angle" and unit == "deg":
            return math.radians(num)
        if kind == "power":
            if unit == "dB" or unit == "dBW":
                return 10.0 ** (num / 10.0)
            if unit == "dBm":
                return 10.0 ** ((num - 30.0) / 10.0)
        raise ScenarioError(
            f"{path}: unit {unit!r} not valid here (kind={kind})")
    raise ScenarioError(f"{path}: expected a number or string, got {value!r}")


@dataclass(frozen=True)
class Scenario:
    """Validated bundle of all subsystem configurations.

    approximation_mode chooses which log-approximation order the channel
    closed forms run at: "exact" uses the library default (high order,
    negligible approximation error), "lemma1" uses lemma_order, the
    coarse tractable order the pointing-level formulas are quoted at.
    The pointing model itself always carries lemma_order, so its exact
    and approximate curves stay comparable side by side.
    """
    array: ArrayConfig
    jitter: JitterParams
    fading: AlphaMuParams
    link: LinkBudget
    mc: McConfig
    approximation_mode: str = "exact"
    lemma_order: float = DEFAULT_LN_APPROX_ORDER
    lobe_fit: str = "exact-fit"

    def __post_init__(self):
        if self.approximation_mode not in APPROXIMATION_MODES:
            raise ScenarioError(
                f"approximation.mode: must be one of {APPROXIMATION_MODES}, "
                f"got {self.approximation_mode!r}")
        if self.lobe_fit not in LOBE_FIT_MODES:
            raise ScenarioError(
                f"approximation.lobe_fit: must be one of {LOBE_FIT_MODES}, "
                f"got {self.lobe_fit!r}")

    def lobe_model(self) -> LobeModel:
        return fit_lobe_model(self.array, self.lobe_fit)

    def pointing_model(self) -> PointingModel:
        return PointingModel(self.lobe_model(), self.jitter,
                             ln_approx_order=self.lemma_order)

    def channel_ln_order(self) -> float:
        if self.approximation_mode == "lemma1":
            return self.lemma_order
        return DEFAULT_CHANNEL_LN_ORDER

    def channel_model(self) -> ChannelModel:
        return ChannelModel(self.fading, self.pointing_model(), self.link,
                            ln_approx_order=self.channel_ln_order())

    def with_mc(self, seed: int | None = None,
                n_samples: int | None = None) -> "Scenario":
        """Copy with MC overrides (CLI flags land here)."""
        mc = self.mc
        if seed is not None:
            mc = replace(mc, seed=seed)
        if n_samples is not None:
            mc = replace(mc, n_samples=n_samples)
        return replace(self, mc=mc)


def default_scenario() -> Scenario:
    """Desk-scale default: 16x16 array at 275 GHz, 100 m link, mild
    jitter, Rayleigh fading, 1e6 samples."""
    array = ArrayConfig(16, carrier_frequency=275e9)
    return Scenario(
        array=array,
        jitter=JitterParams(sigma_theta=0.02),
        fading=AlphaMuParams(alpha=2.0, mu=1.0, h_hat=1.0),
        link=LinkBudget(distance=100.0, carrier_frequency=275e9,
                        absorption_coeff=0.0, tx_power=1e-2,
                        noise_power=1e-12),
        mc=McConfig(n_samples=1_000_000, seed=0, pattern_mode="exact-array"),
    )


def _section(data: dict, name: str) -> dict:
    sub = data.get(name, {})
    if sub is None:
        sub = {}
    if not isinstance(sub, dict):
        raise ScenarioError(f"{name}: expected a mapping, got {sub!r}")
    return sub


def _no_unknown_keys(sub: dict, name: str, allowed: tuple) -> None:
    for key in sub:
        if key not in allowed:
            raise ScenarioError(f"{name}.{key}: unknown field")


def _get_int(sub: dict, name: str, key: str, default):
    if key not in sub or sub[key] is None:
        return default
    v = sub[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{name}.{key}: expected an integer, got {v!r}")
    return v


def from_dict(data: dict) -> Scenario:
    """Build a Scenario from nested plain data, defaulting every absent
    field from default_scenario(); all validation errors carry the
    dotted path of the field that failed."""
    if not isinstance(data, dict):
        raise ScenarioError(f"scenario root: expected a mapping, got {data!r}")
    base = default_scenario()
    known = ("array", "jitter", "fading", "link", "mc", "approximation")
    for key in data:
        if key not in known:
            raise ScenarioError(f"{key}: unknown section")

    arr = _section(data, "array")
    _no_unknown_keys(arr, "array", ("n_elements_per_side", "carrier_frequency"))
    try:
        array = ArrayConfig(
            n_elements_per_side=_get_int(
                arr, "array", "n_elements_per_side",
                base.array.n_elements_per_side),
            carrier_frequency=parse_quantity(
                arr.get("carrier_frequency",
                        base.array.carrier_frequency), "array.carrier_frequency"))
    except DomainError as e:
        raise ScenarioError(f"array: {e}") from e

    jit = _section(data, "jitter")
    _no_unknown_keys(jit, "jitter", ("sigma_theta",))
    try:
        jitter = JitterParams(parse_quantity(
            jit.get("sigma_theta", base.jitter.sigma_theta),
            "jitter.sigma_theta", kind="angle"))
    except DomainError as e:
        raise ScenarioError(f"jitter.sigma_theta: {e}") from e

    fad = _section(data, "fading")
    _no_unknown_keys(fad, "fading", ("alpha", "mu", "h_hat"))
    try:
        fading = AlphaMuParams(
            alpha=parse_quantity(fad.get("alpha", base.fading.alpha),
                                 "fading.alpha"),
            mu=parse_quantity(fad.get("mu", base.fading.mu), "fading.mu"),
            h_hat=parse_quantity(fad.get("h_hat", base.fading.h_hat),
                                 "fading.h_hat"))
    except DomainError as e:
        raise ScenarioError(f"fading: {e}") from e

    lnk = _section(data, "link")
    _no_unknown_keys(lnk, "link", ("distance", "carrier_frequency",
                                   "absorption_coeff", "tx_power",
                                   "noise_power"))
    try:
        link = LinkBudget(
            distance=parse_quantity(lnk.get("distance", base.link.distance),
                                    "link.distance"),
            # when the link leaves f_c unset it follows the array's
            carrier_frequency=parse_quantity(
                lnk.get("carrier_frequency", array.carrier_frequency),
                "link.carrier_frequency"),
            absorption_coeff=parse_quantity(
                lnk.get("absorption_coeff", base.link.absorption_coeff),
                "link.absorption_coeff"),
            tx_power=parse_quantity(lnk.get("tx_power", base.link.tx_power),
                                    "link.tx_power", kind="power"),
            noise_power=parse_quantity(
                lnk.get("noise_power", base.link.noise_power),
                "link.noise_power", kind="power"))
    except DomainError as e:
        raise ScenarioError(f"link: {e}") from e

    mcd = _section(data, "mc")
    _no_unknown_keys(mcd, "mc", ("n_samples", "seed", "histogram_bins",
                                 "pattern_mode"))
    mode = mcd.get("pattern_mode", base.mc.pattern_mode)
    try:
        mc = McConfig(
            n_samples=_get_int(mcd, "mc", "n_samples", base.mc.n_samples),
            seed=_get_int(mcd, "mc", "seed", base.mc.seed),
            histogram_bins=_get_int(mcd, "mc", "histogram_bins",
                                    base.mc.histogram_bins),
            pattern_mode=mode)
    except DomainError as e:
        raise ScenarioError(f"mc: {e}") from e

    app = _section(data, "approximation")
    _no_unknown_keys(app, "approximation", ("mode", "lemma_order", "lobe_fit"))
    approx_mode = app.get("mode", base.approximation_mode)
    lobe_fit = app.get("lobe_fit", base.lobe_fit)
    lemma_order = parse_quantity(
        app.get("lemma_order", base.lemma_order), "approximation.lemma_order")
    if not (math.isfinite(lemma_order) and lemma_order > 1.0):
        raise ScenarioError(
            f"approximation.lemma_order: must be finite and > 1, "
            f"got {lemma_order!r}")

    try:
        return Scenario(array=array, jitter=jitter, fading=fading, link=link,
                        mc=mc, approximation_mode=approx_mode,
                        lemma_order=lemma_order, lobe_fit=lobe_fit)
    except DomainError as e:
        raise ScenarioError(str(e)) from e


def from_yaml(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ScenarioError(f"malformed scenario file {path}: {e}") from e
    if data is None:
        data = {}
    return from_dict(data)
