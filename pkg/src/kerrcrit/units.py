"""Frequency-unit handling at the I/O boundary.

All internal math runs in natural units where the mechanical frequency is 1.
Config files and CLI flags may give frequencies either as dimensionless
multiples of omega_b or as laboratory values like ``10 MHz`` (conventionally
the f = omega/2pi value, as quoted in experiments). Conversion happens once,
on input; ambiguous mixes are a hard error.
"""

from __future__ import annotations

import math
import re

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

_UNIT_HZ = {
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
}

_TOKEN_RE = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Z]*)\s*$")


def parse_frequency_token(text: str) -> tuple[float, bool]:
    """Parse ``"0.127"`` or ``"500 kHz"`` into (value, has_unit).

    With a unit the value is the angular frequency in rad/s computed as
    2*pi*f. Without one it is taken as already expressed in omega_b units.
    """
    m = _TOKEN_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse frequency value {text!r}")
    value = float(m.group(1))
    unit = m.group(2).lower()
    if not unit:
        return value, False
    if unit not in _UNIT_HZ:
        raise ConfigError(
            f"unknown frequency unit {m.group(2)!r} in {text!r} "
            f"(allowed: Hz, kHz, MHz, GHz, or no unit for omega_b multiples)"
        )
    return TWO_PI * value * _UNIT_HZ[unit], True


def resolve_frequencies(raw: dict[str, str], frequency_keys: set[str]) -> dict[str, float]:
    """Convert a dict of raw string values into omega_b units.

    ``omega_b`` itself fixes the scale. If any frequency-like key carries a
    laboratory unit, omega_b must carry one too, otherwise the scale is
    undefined and we refuse to guess.
    """
    parsed: dict[str, tuple[float, bool]] = {}
    for key, text in raw.items():
        if key in frequency_keys:
            parsed[key] = parse_frequency_token(text)
        else:
            try:
                parsed[key] = (float(text), False)
            except ValueError as exc:
                raise ConfigError(f"cannot parse value for {key!r}: {text!r}") from exc

    any_united = any(has_unit for _, has_unit in parsed.values())
    omega_b_entry = parsed.get("omega_b")
    if any_united:
        if omega_b_entry is None or not omega_b_entry[1]:
            raise ConfigError(
                "unit-carrying frequencies present but omega_b has no unit; "
                "declare omega_b with a unit (e.g. 'omega_b = 10 MHz') or use "
                "dimensionless omega_b multiples throughout"
            )
        scale = omega_b_entry[0]
    else:
        scale = None

    out: dict[str, float] = {}
    for key, (value, has_unit) in parsed.items():
        if has_unit:
            out[key] = value / scale
        else:
            out[key] = value
    if "omega_b" in out:
        out["omega_b"] = 1.0
    return out


def omega_b_scale_hz(raw_omega_b: str) -> float | None:
    """Return omega_b/2pi in Hz if the config declared a laboratory unit."""
    value, has_unit = parse_frequency_token(raw_omega_b)
    if not has_unit:
        return None
    return value / TWO_PI
