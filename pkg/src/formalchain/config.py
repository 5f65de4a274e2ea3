"""Flat key = value run configuration files.

Grammar: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines ignored.  Dotted keys address per-dimension arrays (``Lambda.2 = 0.1``).
Unknown keys are rejected so typos cannot silently change a run.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional

from .action import ActionParams
from .chains import SamplerConfig
from .errors import ConfigError
from .growth import GrowthConfig

ACTION_KEYS = {
    "G", "a", "singular_penalty",
    "Lambda.0", "Lambda.1", "Lambda.2",
    "c.0", "c.1", "c.2",
    "f.0", "f.1", "f.2",
    "g.0", "g.1", "g.2",
    "h.0", "h.1", "h.2",
    "alpha.0", "alpha.1", "alpha.2",
}

GROWTH_KEYS = {"layer", "p_circle", "topology_change", "partial_retry"}

SAMPLER_KEYS = {
    "chains", "sweeps", "max_dimension", "mock_stage", "initial_points",
    "x1_candidates", "weight.extend", "weight.fluctuate", "weight.reweight",
    "temperature",
}

SAMPLE_COMMAND_KEYS = ACTION_KEYS | GROWTH_KEYS | SAMPLER_KEYS


def parse_config_text(text: str, allowed: Iterable[str]) -> Dict[str, str]:
    allowed = set(allowed)
    out: Dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in allowed:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {ln}: empty value for {key!r}")
        out[key] = value
    return out


def _as_float(settings: Mapping[str, str], key: str, default: float) -> float:
    if key not in settings:
        return default
    try:
        return float(Fraction(settings[key]))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"key {key!r}: bad number {settings[key]!r}")


def _as_int(settings: Mapping[str, str], key: str, default: int) -> int:
    if key not in settings:
        return default
    try:
        return int(settings[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: bad integer {settings[key]!r}")


def _as_bool(settings: Mapping[str, str], key: str, default: bool) -> bool:
    if key not in settings:
        return default
    v = settings[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: bad flag {settings[key]!r}")


def _triple(settings: Mapping[str, str], stem: str, default: Tuple[float, float, float]):
    return tuple(
        _as_float(settings, f"{stem}.{d}", default[d]) for d in range(3)
    )


def action_params_from(settings: Mapping[str, str]) -> ActionParams:
    try:
        return ActionParams(
            G=_as_float(settings, "G", 1.0),
            Lambda=_triple(settings, "Lambda", (0.0, 0.0, 0.0)),
            c=_triple(settings, "c", (1.0, 1.0, 1.0)),
            f=_triple(settings, "f", (0.1, 0.1, 0.1)),
            g=_triple(settings, "g", (10.0, 10.0, 10.0)),
            h=_triple(settings, "h", (0.0, 0.0, 0.0)),
            a=_as_float(settings, "a", 1.0),
            alpha=_triple(settings, "alpha", (1.0, 1.0, 1.0)),
            singular_penalty=_as_float(settings, "singular_penalty", 1.0e6),
        )
    except Exception as exc:
        raise ConfigError(str(exc))


def growth_config_from(settings: Mapping[str, str]) -> GrowthConfig:
    try:
        return GrowthConfig(
            alpha=tuple(Fraction(settings.get(f"alpha.{d}", "1")) for d in range(3)),
            a=Fraction(settings.get("a", "1")),
            layer=settings.get("layer", "full"),
            topology_change=_as_bool(settings, "topology_change", False),
            p_circle=_as_float(settings, "p_circle", 0.1),
            partial_retry=_as_int(settings, "partial_retry", 64),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc))


def sampler_config_from(settings: Mapping[str, str], seed: int) -> SamplerConfig:
    try:
        return SamplerConfig(
            seed=seed,
            chains=_as_int(settings, "chains", 20),
            sweeps=_as_int(settings, "sweeps", 100),
            max_dimension=_as_int(settings, "max_dimension", 2),
            mock_stage=_as_bool(settings, "mock_stage", True),
            initial_points=_as_int(settings, "initial_points", 1),
            x1_candidates=_as_int(settings, "x1_candidates", 2),
            weight_extend=_as_float(settings, "weight.extend", 0.4),
            weight_fluctuate=_as_float(settings, "weight.fluctuate", 0.4),
            weight_reweight=_as_float(settings, "weight.reweight", 0.2),
            temperature=_as_float(settings, "temperature", 1.0),
            growth=growth_config_from(settings),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc))


def resolved_echo(settings: Mapping[str, str], seed: Optional[int] = None) -> Dict[str, str]:
    """What actually went into the run, for embedding in outputs."""
    out = dict(sorted(settings.items()))
    if seed is not None:
        out["seed"] = str(seed)
    return out
