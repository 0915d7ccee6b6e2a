"""
Configuration settings for the Duffin-Schaeffer lab
"""
import os
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, ValidationError, model_validator

from tools.arith import ConfigError
from tools.series import (
    CatlinTransform, DSCounterexample, ExplicitTable, PowerLaw, PsiSpec, RadialTable, ThresholdPart,
)

load_dotenv()


class Config:
    # Project Settings
    PROJECT_NAME = os.getenv('PROJECT_NAME', 'Duffin-Schaeffer Lab')
    FORMAT_VERSION = '1.0'

    # Execution knobs; none of these can change report content
    OUTPUTS_DIR = os.getenv('DS_LAB_OUTPUTS_DIR', 'outputs')
    MAX_WORKERS = int(os.getenv('DS_LAB_MAX_WORKERS', 1))
    LOG_LEVEL = os.getenv('DS_LAB_LOG_LEVEL', 'INFO')

    # Numerics
    PRECISION_BITS = 128
    DEFAULT_SEED = None
    DEFAULT_MC_SAMPLES = 2000

    # Exit statuses
    EXIT_OK = 0
    EXIT_CHECK_FAILED = 1
    EXIT_CONFIG_ERROR = 2
    EXIT_PRECONDITION = 3


def parse_rational(value: Any) -> Fraction:
    """Accept 3, "3", "1/8" or a decimal such as 0.125"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational: {value!r}") from e
    raise ValueError(f"not a rational: {value!r}")


Rational = Annotated[Fraction, PlainValidator(parse_rational), PlainSerializer(str, return_type=str)]


def parse_table_key(variant: str, key: str) -> Any:
    """A [psi.values] key: a height for radial tables, "q1,q2,..." for explicit tables"""
    try:
        parts = tuple(int(c) for c in key.split(','))
    except ValueError as e:
        raise ValueError(f"{variant} key {key!r} is not an integer vector") from e
    if any(c < 0 for c in parts) or not any(parts):
        raise ValueError(f"{variant} key {key!r} must be a nonzero vector with nonnegative entries")
    if variant == 'radial_table':
        if len(parts) != 1:
            raise ValueError(f"radial_table key {key!r} must be a single height")
        return parts[0]
    return parts


RANDOMIZED_COMMANDS = ('mc',)


class PsiConfig(BaseModel):
    """Structured-text form of a PsiSpec, tagged by variant"""
    model_config = ConfigDict(extra='forbid', arbitrary_types_allowed=True)

    variant: Literal['power_law', 'radial_table', 'explicit_table', 'ds_counterexample',
                     'catlin_transform', 'threshold_part']
    c: Optional[Rational] = None
    tau: Optional[Rational] = None
    values: Dict[str, Rational] = Field(default_factory=dict)
    n: Optional[int] = None
    N: Optional[int] = None
    eta: Optional[Rational] = None
    t_max: Optional[int] = None
    part: Optional[Literal['small', 'large']] = None
    inner: Optional['PsiConfig'] = None

    @model_validator(mode='after')
    def _variant_fields(self) -> 'PsiConfig':
        required = {
            'power_law': ('c', 'tau'),
            'radial_table': (),
            'explicit_table': (),
            'ds_counterexample': ('N', 'eta'),
            'catlin_transform': ('inner', 't_max'),
            'threshold_part': ('inner', 'part'),
        }[self.variant]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.variant} needs {', '.join(missing)}")
        return self

    @model_validator(mode='after')
    def _table_keys(self) -> 'PsiConfig':
        if self.variant in ('radial_table', 'explicit_table'):
            for key in self.values:
                parse_table_key(self.variant, key)
        elif self.values:
            raise ValueError(f"{self.variant} takes no values table")
        return self

    def to_spec(self) -> PsiSpec:
        if self.variant == 'power_law':
            return PowerLaw(self.c, self.tau)
        if self.variant == 'radial_table':
            return RadialTable(tuple((parse_table_key(self.variant, k), v) for k, v in self.values.items()))
        if self.variant == 'explicit_table':
            return ExplicitTable(tuple((parse_table_key(self.variant, k), v) for k, v in self.values.items()), n=self.n)
        if self.variant == 'ds_counterexample':
            return DSCounterexample(self.N, self.eta)
        if self.variant == 'catlin_transform':
            return CatlinTransform(self.inner.to_spec(), self.t_max)
        return ThresholdPart(self.inner.to_spec(), self.part)


PsiConfig.model_rebuild()


class SetConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', arbitrary_types_allowed=True)

    q: List[int]
    epsilon: Rational
    mode: Literal['plain', 'coprime', 'filtered'] = 'coprime'


class RunConfig(BaseModel):
    """One lab run: a command plus every parameter it may read"""
    model_config = ConfigDict(extra='forbid', arbitrary_types_allowed=True)

    command: Literal['measure', 'intersect', 'overlap-scan', 'series', 'window', 'mc',
                     'counterexample', 'lemmas']
    n: int = Field(1, ge=1)
    m: int = Field(1, ge=1)
    q: Optional[List[int]] = None
    q2: Optional[List[int]] = None
    epsilon: Optional[Rational] = None
    epsilon2: Optional[Rational] = None
    mode: Literal['plain', 'coprime', 'filtered'] = 'coprime'
    phi_mode: Literal['joint', 'componentwise'] = 'joint'
    psi: Optional[PsiConfig] = None
    series: Optional[str] = None
    Q: int = Field(1, ge=1)
    H: int = Field(1, ge=1)
    D: int = Field(1, ge=1)
    t_max: int = Field(1, ge=1)
    K: int = Field(1, ge=1)
    X: int = Field(1, ge=1)
    Y_max: Optional[int] = None
    d: int = Field(1, ge=1)
    s: Rational = Fraction(1)
    coprime: bool = True
    q_min: int = Field(0, ge=0)
    target: Literal['hits', 'union'] = 'hits'
    sets: List[SetConfig] = Field(default_factory=list)
    N: Optional[int] = None
    eta: Optional[Rational] = None
    samples: int = Field(Config.DEFAULT_MC_SAMPLES, ge=0)
    seed: Optional[int] = Config.DEFAULT_SEED
    out: Optional[str] = None
    precision_bits: int = Field(Config.PRECISION_BITS, ge=53)
    workers: int = Field(Config.MAX_WORKERS, ge=1)

    @model_validator(mode='after')
    def _seeded(self) -> 'RunConfig':
        randomized = self.command in RANDOMIZED_COMMANDS or (self.command == 'counterexample' and self.samples)
        if randomized and self.seed is None:
            raise ValueError(f"command {self.command!r} is randomized and needs an explicit seed")
        return self

    def echo(self) -> Dict[str, Any]:
        """Config echo for reports; workers and out are left out so they cannot change report bytes"""
        return self.model_dump(mode='json', exclude={'workers', 'out'}, exclude_none=True)


def load_run_config(path: Optional[str], overrides: Dict[str, Any]) -> RunConfig:
    """
    Read a TOML run configuration and apply flag overrides

    Args:
        path: TOML file, or None to build from overrides alone
        overrides: Values from command-line flags; None entries are ignored

    Returns:
        Validated RunConfig
    """
    data: Dict[str, Any] = {}
    try:
        if path:
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.model_validate(data)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"malformed TOML in {path}: {e}") from e
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}") from e
