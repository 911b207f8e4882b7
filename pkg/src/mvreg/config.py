"""Flat key/value run configuration shared by all CLI subcommands."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError, UnknownConfigKey
from .icp import IcpConfig
from .pipeline import PipelineConfig
from .saliency import RetrievalConfig

# key -> (section, coercion). Optional keys accept the literal "none".
_KEYS = {
    "range_accuracy": ("icp", float),
    "max_iterations": ("icp", int),
    "coincidence_factor": ("icp", float),
    "min_overlap": ("icp", float),
    "overlap_gate": ("pipeline", float),
    "outer_iterations": ("pipeline", int),
    "outer_tolerance": ("pipeline", float),
    "averaging_epsilon": ("pipeline", float),
    "averaging_max_rounds": ("pipeline", int),
    "th_saliency": ("retrieval", float),
    "saliency_percentile": ("retrieval", float),
    "th_dist": ("retrieval", float),
    "thres_ft": ("retrieval", float),
    "scale_fraction": ("retrieval", float),
    "seed": ("misc", int),
}
_OPTIONAL = {"th_saliency", "th_dist"}


@dataclass(frozen=True)
class RunConfig:
    icp: IcpConfig = field(default_factory=IcpConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    seed: int = 0


def config_from_dict(values: dict) -> RunConfig:
    sections: dict[str, dict] = {"icp": {}, "pipeline": {}, "retrieval": {}, "misc": {}}
    for key, raw in values.items():
        if key not in _KEYS:
            raise UnknownConfigKey(f"unknown config key {key!r}")
        section, coerce = _KEYS[key]
        if key in _OPTIONAL and str(raw).strip().lower() == "none":
            sections[section][key] = None
            continue
        try:
            sections[section][key] = coerce(raw)
        except (TypeError, ValueError):
            raise InputError(f"bad value {raw!r} for config key {key!r}") from None
    icp = IcpConfig(**sections["icp"])
    pipeline = PipelineConfig(icp=icp, **sections["pipeline"])
    retrieval = RetrievalConfig(**sections["retrieval"])
    return RunConfig(icp=icp, pipeline=pipeline, retrieval=retrieval,
                     seed=sections["misc"].get("seed", 0))


def read_config(path) -> RunConfig:
    """Parse a 'key = value' file, '#' starting a comment."""
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key in values:
                raise InputError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = raw
    return config_from_dict(values)
