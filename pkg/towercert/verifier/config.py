import logging
import os
from pathlib import Path
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from towercert.errors import ConfigError, DegenerateParameters
from towercert.exactfield import FieldSpec, make_field, parse_rational
from towercert.groebner import DEFAULT_STEP_BUDGET
from towercert.rigidity import DEFAULT_DEGREE_BOUND
from towercert.tower import FAULTS


logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

# --- Configuration ---
CHECK_IDS = tuple(f"C{i}" for i in range(1, 15))
MAX_LEVEL = 5

DEFAULT_LAMBDAS = ("1", "2", "3")
DEFAULT_MODIFIED_PARAMETERS = ("2", "-1", "1/2")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"{name}={raw!r} is not an integer") from e


def _split(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


class VerifierConfig(BaseModel):
    """Everything a suite run depends on; echoed into the report."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(default=3, ge=1, le=MAX_LEVEL)
    lambdas: tuple[str, str, str] = DEFAULT_LAMBDAS
    degree_bound: int = Field(default=DEFAULT_DEGREE_BOUND, ge=1)
    checks: tuple[str, ...] = CHECK_IDS
    report: Literal["json", "md"] = "json"
    out: Path | None = None
    budget: int = Field(default=DEFAULT_STEP_BUDGET, ge=1)
    breaks: tuple[str, ...] = ()
    workers: int = Field(default=4, ge=1)
    modified_parameters: tuple[str, ...] = DEFAULT_MODIFIED_PARAMETERS
    verbose: bool = False

    @field_validator("lambdas", "modified_parameters")
    @classmethod
    def _rational_literals(cls, values: tuple[str, ...]) -> tuple[str, ...]:
        for v in values:
            parse_rational(v)
        return tuple(str(parse_rational(v)) for v in values)

    @field_validator("modified_parameters")
    @classmethod
    def _nonzero(cls, values: tuple[str, ...]) -> tuple[str, ...]:
        if any(parse_rational(v) == 0 for v in values):
            raise ValueError("modified homotopy parameters must be nonzero")
        return values

    @field_validator("checks")
    @classmethod
    def _known_checks(cls, values: tuple[str, ...]) -> tuple[str, ...]:
        unknown = [c for c in values if c not in CHECK_IDS]
        if unknown:
            raise ValueError(f"unknown check ids {unknown}")
        # registry order, no duplicates
        return tuple(c for c in CHECK_IDS if c in values)

    @field_validator("breaks")
    @classmethod
    def _known_faults(cls, values: tuple[str, ...]) -> tuple[str, ...]:
        unknown = [b for b in values if b not in FAULTS]
        if unknown:
            raise ValueError(f"unknown fault ids {unknown}; expected one of {sorted(FAULTS)}")
        return tuple(sorted(set(values)))

    def field_spec(self) -> FieldSpec:
        """The base field; ``repeated-root`` deliberately sets lambda2 = lambda1."""
        l1, l2, l3 = self.lambdas
        if "repeated-root" in self.breaks:
            return FieldSpec.unchecked(l1, l1, l3)
        return make_field(l1, l2, l3)

    def echo(self) -> dict:
        return self.model_dump(mode="json", exclude={"out", "workers", "verbose"})


def env_defaults() -> dict:
    """Config values taken from TOWERCERT_* environment variables."""
    values: dict = {
        "n": _env_int("TOWERCERT_N", 3),
        "degree_bound": _env_int("TOWERCERT_DEGREE_BOUND", DEFAULT_DEGREE_BOUND),
        "budget": _env_int("TOWERCERT_BUDGET", DEFAULT_STEP_BUDGET),
        "workers": _env_int("TOWERCERT_WORKERS", 4),
    }
    lambdas = os.getenv("TOWERCERT_LAMBDAS")
    if lambdas:
        values["lambdas"] = tuple(_split(lambdas))
    return values


def load_config(**overrides) -> VerifierConfig:
    """Environment defaults, then explicit overrides, validated.

    Raises:
        ConfigError: Any field is malformed or the lambdas are degenerate.
    """
    values = env_defaults()
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        config = VerifierConfig.model_validate(values)
        config.field_spec()
    except ValidationError as e:
        raise ConfigError(_first_error(e)) from e
    except DegenerateParameters as e:
        raise ConfigError(str(e)) from e
    logger.debug(f"Loaded config: {config.echo()}")
    return config


def _first_error(e: ValidationError) -> str:
    errors = e.errors()
    if not errors:
        return str(e)
    first = errors[0]
    where = ".".join(str(p) for p in first["loc"])
    return f"{where}: {first['msg']}"
