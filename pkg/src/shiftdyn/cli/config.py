"""Run configuration: a TOML document validated strictly (unknown keys are errors)."""

from __future__ import annotations

import os
import sys
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigInvalid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "SHIFTDYN_"
ENV_HORIZONS = {"L_MAX": "L_max", "N": "N", "K_COUNT": "k_count"}


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FamilyConfig(Section):
    name: Literal["example_3_2", "example_3_6", "example_3_11", "constant", "custom"] = "example_3_2"
    alpha: Optional[float] = None
    unitary: Literal["identity", "bilateral_shift", "bilateral_shift_inverse"] = "identity"
    pair: Literal["default", "alternate"] = "default"
    # constant family: W_j = constant * (shift by offset)
    constant: float = 1.0
    offset: int = 0
    # custom family: coefficient c(j) per index, edge values extend beyond the table
    table: Optional[dict[int, float]] = None

    @model_validator(mode="after")
    def _parameters(self):
        if self.name == "example_3_11":
            if self.alpha is None:
                raise ValueError("example_3_11 needs alpha")
            if self.alpha <= 1:
                raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if self.name == "custom" and not self.table:
            raise ValueError("custom family needs a coefficient table")
        if self.name == "constant" and self.constant == 0:
            raise ValueError("constant weight must be nonzero")
        return self


class TruncationConfig(Section):
    M: int = Field(64, ge=1)


class WindowConfig(Section):
    J: int = Field(1, ge=1)
    m: int = Field(1, ge=1)


class SequenceConfig(Section):
    start: int = Field(1, ge=0)
    step: int = Field(1, ge=1)
    terms: Optional[list[int]] = None


class SequencesConfig(Section):
    nk: SequenceConfig = SequenceConfig(start=3, step=1)
    tn: SequenceConfig = SequenceConfig(start=0, step=1)


class HorizonsConfig(Section):
    L_max: int = Field(500, ge=4)
    N: int = Field(200, ge=1)
    k_count: int = Field(8, ge=2)


class TolerancesConfig(Section):
    eps: float = Field(0.1, gt=0)
    divergence_bound: float = Field(1e6, gt=0)
    cauchy: float = Field(1e-8, gt=0)
    ratio_limit: float = Field(0.999, gt=0, lt=1)
    raabe_converge: float = Field(1.25, gt=1)
    limit_zero: float = Field(1e-6, gt=0)


class FurstenbergConfig(Section):
    variant: Literal["Inf", "Cof", "LowerDensity"] = "Cof"
    delta: Optional[float] = Field(None, gt=0, le=1)
    k_inf: int = Field(25, ge=1)
    k_tail: int = Field(25, ge=0)

    @model_validator(mode="after")
    def _delta(self):
        if (self.variant == "LowerDensity") != (self.delta is not None):
            raise ValueError("delta is required for LowerDensity and only for it")
        return self


class NormsConfig(Section):
    i_min: int = 0
    i_max: int = 3
    l_min: int = Field(2, ge=1)
    l_max: int = Field(10, ge=1)
    dense: bool = False

    @model_validator(mode="after")
    def _ranges(self):
        if self.i_min > self.i_max or self.l_min > self.l_max:
            raise ValueError("empty i or l range")
        return self


class StarConfig(Section):
    m: Optional[int] = Field(None, ge=0)
    Nm: Optional[int] = Field(None, ge=0)
    probe: int = Field(50, ge=0)
    unitaries: Optional[list[Literal["identity", "bilateral_shift", "bilateral_shift_inverse"]]] = None


class WitnessConfig(Section):
    n_k: list[int] = [20, 40, 60]
    seed: Optional[int] = None


class PeriodicConfig(Section):
    n: int = Field(4, ge=1)
    L: int = Field(20, ge=0)


class OutputConfig(Section):
    timings: bool = False


class RunConfig(Section):
    family: FamilyConfig = FamilyConfig()
    truncation: TruncationConfig = TruncationConfig()
    window: WindowConfig = WindowConfig()
    sequences: SequencesConfig = SequencesConfig()
    horizons: HorizonsConfig = HorizonsConfig()
    tolerances: TolerancesConfig = TolerancesConfig()
    furstenberg: FurstenbergConfig = FurstenbergConfig()
    norms: NormsConfig = NormsConfig()
    star: StarConfig = StarConfig()
    witness: WitnessConfig = WitnessConfig()
    periodic: PeriodicConfig = PeriodicConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _dense_window(self):
        # the dense cross-check materializes P_m-products of up to l_max shifts
        if self.norms.dense and self.truncation.M < self.window.m + self.norms.l_max:
            raise ValueError(
                f"truncation.M={self.truncation.M} is below m + norms.l_max = {self.window.m + self.norms.l_max}"
            )
        return self


def _format_errors(exc: ValidationError) -> list[str]:
    out = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        out.append(f"{loc}: {err['msg']}")
    return out


def apply_env_overrides(data: dict[str, Any], environ: Optional[dict[str, str]] = None) -> dict[str, Any]:
    """Horizon overrides from SHIFTDYN_L_MAX, SHIFTDYN_N and SHIFTDYN_K_COUNT."""
    environ = os.environ if environ is None else environ
    horizons = dict(data.get("horizons", {}))
    for suffix, key in ENV_HORIZONS.items():
        raw = environ.get(ENV_PREFIX + suffix)
        if raw is not None:
            try:
                horizons[key] = int(raw)
            except ValueError:
                raise ConfigInvalid([f"{ENV_PREFIX}{suffix}: not an integer: {raw!r}"]) from None
    if horizons:
        data = {**data, "horizons": horizons}
    return data


def parse_config(data: dict[str, Any], environ: Optional[dict[str, str]] = None) -> RunConfig:
    data = apply_env_overrides(data, environ)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigInvalid(_format_errors(exc)) from None


def load_config(path: Optional[str | Path], environ: Optional[dict[str, str]] = None) -> RunConfig:
    if path is None:
        return parse_config({}, environ)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigInvalid([f"{path}: {exc.strerror}"]) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid([f"{path}: {exc}"]) from None
    return parse_config(data, environ)
