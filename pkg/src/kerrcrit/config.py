"""Parameter files, run configuration, and provenance headers.

The parameter file is plain ``key = value`` text with ``#`` comments.
Frequency-like values accept either dimensionless multiples of omega_b or
laboratory units (``10 MHz`` means omega/2pi = 10 MHz); see ``units``.
Unknown keys are a hard error, listing the offenders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import units
from .errors import ConfigError
from .model import SystemParams, drive_amplitude_from_power

# Keys interpreted as frequencies/rates (unit-bearing); everything else is
# dimensionless. Names follow the domain glossary exactly.
FREQUENCY_KEYS = {
    "omega_b", "omega_a", "omega_c", "omega_ci", "delta_c",
    "g_a", "g_c", "kappa_a", "kappa_c", "kappa_b", "epsilon_c",
    "G", "Delta_c", "Delta_a", "kappa_minus", "kappa_plus", "eta_floor",
}
SCALAR_KEYS = {
    "upsilon", "n_period", "N_trunc", "q_max", "drive_power_w", "epsilon_a",
}
ALL_KEYS = FREQUENCY_KEYS | SCALAR_KEYS

DEFAULT_OMEGA_C = 600.0  # omega_b units; only the detuning enters the physics


def read_param_file(path: str | Path) -> dict[str, str]:
    return read_param_file_text(Path(path).read_text(), source=str(path))


def default_param_text() -> str:
    return resources.files("kerrcrit.data").joinpath("default_params.conf").read_text()


def load_params(path: str | Path | None = None,
                overrides: dict[str, str] | None = None) -> "ResolvedConfig":
    """Parse and validate a parameter file plus CLI overrides."""
    if path is None:
        raw = read_param_file_text(default_param_text(), source="<defaults>")
    else:
        raw = read_param_file(path)
    if overrides:
        raw.update({k: str(v) for k, v in overrides.items() if v is not None})

    unknown = sorted(set(raw) - ALL_KEYS)
    if unknown:
        raise ConfigError(f"unknown parameter keys: {', '.join(unknown)} "
                          f"(allowed: {', '.join(sorted(ALL_KEYS))})")
    return ResolvedConfig.from_raw(raw)


def read_param_file_text(text: str, source: str = "<string>") -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


@dataclass
class ResolvedConfig:
    """All run inputs in omega_b units, plus bookkeeping for provenance."""

    values: dict[str, float]
    raw: dict[str, str]
    omega_b_hz: float | None
    delta_a_is_eta: bool = False

    @classmethod
    def from_raw(cls, raw: dict[str, str]) -> "ResolvedConfig":
        raw = dict(raw)
        delta_a_is_eta = raw.get("Delta_a", "").strip().lower() == "eta"
        if delta_a_is_eta:
            raw.pop("Delta_a")
        omega_b_hz = None
        if "omega_b" in raw:
            omega_b_hz = units.omega_b_scale_hz(raw["omega_b"])
        values = units.resolve_frequencies(
            {k: v for k, v in raw.items()}, FREQUENCY_KEYS)
        if delta_a_is_eta:
            raw["Delta_a"] = "eta"
        return cls(values=values, raw=raw, omega_b_hz=omega_b_hz,
                   delta_a_is_eta=delta_a_is_eta)

    def get(self, key: str, default: float | None = None) -> float | None:
        return self.values.get(key, default)

    def require(self, key: str) -> float:
        if key not in self.values:
            raise ConfigError(f"missing required parameter {key!r}")
        return self.values[key]

    def system_params(self) -> SystemParams:
        """Assemble SystemParams, deriving the drive from G/Delta_c targets.

        Accepted drive specifications, in precedence order: explicit
        epsilon_c (+ delta_c or omega_ci), drive_power_w (needs laboratory
        omega_b), or an operating point (G, Delta_c) closed through the
        drive inversion. G = 0 configurations fall back to delta_c alone.
        """
        v = self.values
        omega_c = v.get("omega_c", DEFAULT_OMEGA_C)
        if "delta_c" in v and "omega_ci" in v:
            raise ConfigError("give either delta_c or omega_ci, not both")

        delta_c = v.get("delta_c")
        if delta_c is None and "omega_ci" in v:
            delta_c = omega_c - v["omega_ci"]

        epsilon_c = v.get("epsilon_c")
        if "drive_power_w" in v:
            if epsilon_c is not None:
                raise ConfigError("give either epsilon_c or drive_power_w, not both")
            if self.omega_b_hz is None:
                raise ConfigError("drive_power_w requires omega_b with a unit")
            scale = 2.0 * math.pi * self.omega_b_hz
            if delta_c is None:
                raise ConfigError("drive_power_w requires delta_c (or omega_ci)")
            epsilon_c = drive_amplitude_from_power(
                v["drive_power_w"], v.get("kappa_c", 0.0) * scale,
                (omega_c - delta_c) * scale) / scale

        base = dict(
            omega_b=1.0, omega_a=v.get("omega_a", 1.0), omega_c=omega_c,
            g_a=v.get("g_a", 0.0), g_c=v.get("g_c", 0.0),
            kappa_a=self.require("kappa_a"), kappa_c=self.require("kappa_c"),
            kappa_b=v.get("kappa_b", 1e-4),
        )

        if epsilon_c is None and "G" in v and "Delta_c" in v:
            from .model import target_drive
            probe = SystemParams(**base, epsilon_c=0.0,
                                 omega_ci=omega_c - v["Delta_c"])
            epsilon_c, delta_c = target_drive(probe, v["G"], v["Delta_c"])
        if epsilon_c is None:
            epsilon_c = 0.0
        if delta_c is None:
            delta_c = v.get("Delta_c", 1.0)
        return SystemParams(**base, epsilon_c=epsilon_c,
                            omega_ci=omega_c - delta_c)


def provenance_header(config_items: dict[str, object], timestamp: str,
                      version: str) -> list[str]:
    """Comment lines recording the fully resolved run configuration.

    The timestamp is isolated on its own line so outputs can be compared
    byte-for-byte after dropping it.
    """
    lines = [f"# kerrcrit {version}", f"# timestamp = {timestamp}"]
    for key in sorted(config_items):
        lines.append(f"# {key} = {config_items[key]}")
    return lines


def strip_timestamp(lines: list[str]) -> list[str]:
    return [ln for ln in lines if not ln.startswith("# timestamp")]
