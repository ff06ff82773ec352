"""Pipeline configuration and its ``key = value`` file format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    # segmentation; *_frac values are fractions of the bounding-box diagonal
    resample_step_frac: float = 0.005
    curvature_k: int = 4
    corner_angle_deg: float = 25.0
    speed_min_frac: float = 0.20
    merge_frac: float = 0.01
    pressure_jump: float = 0.25
    line_tol: float = 0.01
    arc_tol: float = 0.02
    arc_min_sweep_deg: float = 10.0
    max_split_depth: int = 4
    min_primitive_frac: float = 0.01
    # interest selection
    redraw_radius_frac: float = 0.02
    redraw_tangent_deg: float = 20.0
    redraw_overlap: float = 0.5
    # descriptor
    radius_frac: float = 0.30
    resample_points_on_min_primitive: int = 16
    # matching
    reenumerate_on_sign_mismatch: bool = False

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type == "bool":
                if not isinstance(v, bool):
                    raise ConfigError(f"{f.name} must be a boolean")
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{f.name} must be numeric")
            if f.type == "int" and int(v) != v:
                raise ConfigError(f"{f.name} must be an integer")
        positive = [f.name for f in fields(self) if f.type == "float" and f.name != "redraw_overlap"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        if not 0 < self.redraw_overlap <= 1:
            raise ConfigError("redraw_overlap must lie in (0, 1]")
        if self.curvature_k < 1:
            raise ConfigError("curvature_k must be >= 1")
        if self.max_split_depth < 0:
            raise ConfigError("max_split_depth must be >= 0")
        if self.resample_points_on_min_primitive < 4:
            raise ConfigError("resample_points_on_min_primitive must be >= 4")
        if not self.corner_angle_deg < 180:
            raise ConfigError("corner_angle_deg must be < 180")
        if not self.speed_min_frac < 1:
            raise ConfigError("speed_min_frac must be < 1")
        if not self.redraw_tangent_deg <= 90:
            raise ConfigError("redraw_tangent_deg must be <= 90")

    def replace(self, **overrides) -> "PipelineConfig":
        return dataclasses.replace(self, **overrides)

    def with_strings(self, items: dict[str, str]) -> "PipelineConfig":
        """Apply textual overrides, converting each value to the field's type."""
        types = {f.name: f.type for f in fields(self)}
        conv = {}
        for key, raw in items.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            conv[key] = _convert(key, types[key], raw)
        return self.replace(**conv)

    def dumps(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {str(v).lower() if isinstance(v, bool) else repr(v)}")
        return "\n".join(lines) + "\n"


def _convert(key: str, typ: str, raw: str):
    raw = raw.strip()
    try:
        if typ == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if typ == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config(text: str) -> dict[str, str]:
    items = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        items[key] = value
    return items


def load_config(path=None, overrides: dict[str, str] | None = None) -> PipelineConfig:
    """Defaults, then the file at ``path``, then ``overrides`` (flags win)."""
    items = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            items.update(parse_config(fh.read()))
    items.update(overrides or {})
    return PipelineConfig().with_strings(items)
