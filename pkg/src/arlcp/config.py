"""Toolkit configuration: JSON file < CLI overrides, with built-in defaults underneath."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from .complexity import ConfigError, PenaltyConfig
from .sim_trainer import Archetype, RewardMode, SimConfig

PENALTY_KEYS = ("n1", "n2", "lambda1", "lambda2", "lambda3", "alpha")


@dataclass(frozen=True)
class ToolkitConfig:
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    lexicon_path: Optional[str] = None
    sim: Optional[SimConfig] = field(default_factory=SimConfig)
    output_dir: str = "arlcp_out"
    rtc_bin_width: int = 20

    def to_dict(self) -> dict:
        sim = None
        if self.sim is not None:
            sim = asdict(self.sim)
            sim.pop("penalty")
            sim["reward_mode"] = self.sim.reward_mode.value
            sim["archetypes"] = [asdict(a) for a in self.sim.archetypes]
            if sim["initial_logits"] is not None:
                sim["initial_logits"] = list(sim["initial_logits"])
        return {
            "penalty": self.penalty.to_dict(),
            "lexicon_path": self.lexicon_path,
            "output_dir": self.output_dir,
            "rtc_bin_width": self.rtc_bin_width,
            "sim": sim,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _check_keys(section: str, raw: Mapping, allowed) -> None:
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {unknown}")


def _build_sim(raw: Mapping[str, Any], penalty: PenaltyConfig) -> SimConfig:
    allowed = {f.name for f in fields(SimConfig)} - {"penalty"}
    _check_keys("sim", raw, allowed)
    kw = dict(raw)
    if "archetypes" in kw:
        arch_fields = {f.name for f in fields(Archetype)}
        archs = []
        for a in kw["archetypes"]:
            _check_keys("sim.archetypes[]", a, arch_fields)
            try:
                archs.append(Archetype(**a))
            except TypeError as exc:
                raise ConfigError(f"bad archetype {a}: {exc}") from None
        kw["archetypes"] = tuple(archs)
    if "initial_logits" in kw and kw["initial_logits"] is not None:
        kw["initial_logits"] = tuple(kw["initial_logits"])
    try:
        if "reward_mode" in kw:
            kw["reward_mode"] = RewardMode(kw["reward_mode"])
        return SimConfig(penalty=penalty, **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sim config: {exc}") from None


def build_config(raw: Optional[Mapping[str, Any]] = None,
                 overrides: Optional[Mapping[str, Any]] = None) -> ToolkitConfig:
    """Merge a parsed config mapping with flat CLI overrides.

    Recognised override keys: the penalty fields, ``lexicon_path``, ``output_dir``,
    ``seed``, ``rtc_bin_width``. ``None`` values are ignored.
    """
    raw = dict(raw or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    _check_keys("config", raw, {"penalty", "lexicon_path", "output_dir", "sim", "rtc_bin_width"})

    pen_raw = dict(raw.get("penalty") or {})
    _check_keys("penalty", pen_raw, {f.name for f in fields(PenaltyConfig)})
    pen_raw.update({k: overrides[k] for k in PENALTY_KEYS if k in overrides})
    try:
        penalty = PenaltyConfig(**pen_raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None

    sim_raw = raw.get("sim", {})
    sim = None if sim_raw is None else _build_sim(sim_raw, penalty)
    if sim is not None and "seed" in overrides:
        sim = replace(sim, seed=int(overrides["seed"]))

    bin_width = overrides.get("rtc_bin_width", raw.get("rtc_bin_width", 20))
    if isinstance(bin_width, bool) or not isinstance(bin_width, int) or bin_width < 1:
        raise ConfigError("rtc_bin_width must be a positive integer")
    return ToolkitConfig(
        penalty=penalty,
        lexicon_path=overrides.get("lexicon_path", raw.get("lexicon_path")),
        sim=sim,
        output_dir=str(overrides.get("output_dir", raw.get("output_dir", "arlcp_out"))),
        rtc_bin_width=bin_width,
    )


def load_config(path=None, overrides: Optional[Mapping[str, Any]] = None) -> ToolkitConfig:
    raw = None
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    return build_config(raw, overrides)
