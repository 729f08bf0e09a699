"""Run configuration: flat ``key = value`` files with section headers.

Example::

    [sequence]
    seq = paper
    R = 4
    eps = 1/2

    [equation]
    a = 2
    b = 1

Every key belongs to exactly one section; unknown sections and keys are
rejected.  Command line flags override file values.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Any, Callable

from .errors import UsageError
from .sequence import (
    ConstructionParams,
    ErdosFortet,
    ExplicitSequence,
    Geometric,
    PaperSequence,
    SequenceSpec,
    TowerSpec,
)
from .trigsums import TrigPoly

SEQUENCES = ("geometric", "erdos-fortet", "paper", "explicit")
FORMATS = ("csv", "json")


def parse_int_list(text: str) -> tuple[int, ...]:
    """``"1..5"``, ``"2,3,4"`` or a mix such as ``"1..3,8"``."""
    out: list[int] = []
    for piece in str(text).replace(" ", "").split(","):
        if not piece:
            continue
        if ".." in piece:
            lo, hi = piece.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError(f"empty range {piece!r}")
            out.extend(range(lo_i, hi_i + 1))
        else:
            out.append(int(piece))
    if not out:
        raise ValueError("empty list")
    return tuple(out)


def parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)


def parse_fraction(text) -> Fraction:
    return Fraction(str(text).strip())


def parse_bool(text) -> bool:
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (section, parser)
KEYS: dict[str, tuple[str, Callable[[str], Any]]] = {
    "seq": ("sequence", str),
    "q": ("sequence", int),
    "values": ("sequence", parse_int_list),
    "R": ("construction", int),
    "eps": ("construction", parse_fraction),
    "d": ("construction", int),
    "K": ("construction", parse_fraction),
    "tower": ("construction", str),
    "a": ("equation", int),
    "b": ("equation", int),
    "c": ("equation", int),
    "exclude_zero": ("equation", parse_bool),
    "f": ("experiment", str),
    "N": ("experiment", int),
    "Ns": ("experiment", parse_int_list),
    "M": ("experiment", int),
    "seed": ("experiment", int),
    "trials": ("experiment", int),
    "blocks": ("experiment", parse_int_list),
    "weights": ("experiment", parse_float_list),
    "workers": ("experiment", int),
    "format": ("output", str),
    "out": ("output", str),
}
SECTIONS = sorted({s for s, _ in KEYS.values()})


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    seq: str = "geometric"
    q: int = 2
    values: tuple[int, ...] = ()
    R: int = 9
    eps: Fraction = Fraction(1, 2)
    d: int | None = None
    K: Fraction = Fraction(1)
    tower: str = "reduced"
    a: int = 1
    b: int = 1
    c: int = 0
    exclude_zero: bool = True
    f: str = "cos"
    N: int = 10
    Ns: tuple[int, ...] = ()
    M: int = 10_000
    seed: int = 0
    trials: int = 100
    blocks: tuple[int, ...] = (2,)
    weights: tuple[float, ...] = ()
    workers: int = 1
    format: str | None = None
    out: str | None = None

    def validate(self) -> "RunConfig":
        if self.seq not in SEQUENCES:
            raise UsageError(f"unknown sequence {self.seq!r}; choose from {', '.join(SEQUENCES)}")
        if not 0 < self.eps < 1:
            raise UsageError(f"eps = {self.eps} must lie in (0, 1)")
        if self.K <= 0:
            raise UsageError("K must be positive")
        if self.R < 3:
            raise UsageError("R must be an integer >= 3")
        if self.d is not None and self.d < 1:
            raise UsageError("d must be >= 1")
        if self.format is not None and self.format not in FORMATS:
            raise UsageError(f"format must be one of {', '.join(FORMATS)}")
        for name in ("N", "M", "trials", "workers"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be >= 1")
        if self.a < 1 or self.b < 1 or self.c < 0:
            raise UsageError("need a, b >= 1 and c >= 0")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must lie in [0, 2**64)")
        if any(i < 1 for i in self.blocks):
            raise UsageError("block indices start at 1")
        try:
            self.trig_poly()
            self.tower_spec()
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if self.seq == "explicit" and not self.values:
            raise UsageError("an explicit sequence needs values")
        return self

    def resolved_d(self) -> int:
        return self.d if self.d is not None else 21 * math.ceil(1 / self.eps)

    def tower_spec(self) -> TowerSpec:
        if self.tower in ("reduced", "paper"):
            return TowerSpec(self.tower)
        if self.tower.startswith("table:"):
            return TowerSpec.explicit(parse_int_list(self.tower[6:]))
        raise ValueError(f"tower must be reduced, paper or table:<t1,t2,...>, not {self.tower!r}")

    def construction(self) -> ConstructionParams:
        return ConstructionParams(R=self.R, eps=self.eps, d=self.resolved_d(), K=self.K,
                                  tower=self.tower_spec())

    def sequence(self) -> SequenceSpec:
        if self.seq == "geometric":
            return Geometric(self.q)
        if self.seq == "erdos-fortet":
            return ErdosFortet()
        if self.seq == "paper":
            return PaperSequence(self.construction())
        return ExplicitSequence(self.values)

    def trig_poly(self) -> TrigPoly:
        """``cos``, ``erdos-fortet`` or ``power:<d>``."""
        if self.f == "cos":
            return TrigPoly.cosine()
        if self.f == "erdos-fortet":
            return TrigPoly.erdos_fortet()
        if self.f.startswith("power:"):
            return TrigPoly.power_sum(int(self.f[6:]))
        raise ValueError(f"f must be cos, erdos-fortet or power:<d>, not {self.f!r}")

    def to_dict(self) -> dict:
        """Resolved configuration; :meth:`from_dict` inverts it."""
        out = {}
        for fl in fields(self):
            v = getattr(self, fl.name)
            if fl.name == "d":
                v = self.resolved_d()
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[fl.name] = v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        kw = dict(data)
        for name in ("eps", "K"):
            if name in kw:
                kw[name] = Fraction(kw[name])
        for name in ("values", "Ns", "blocks", "weights"):
            if name in kw:
                kw[name] = tuple(kw[name])
        return cls(**kw)


def read_config_text(text: str, source: str = "<config>") -> dict:
    """Parse a configuration file body into typed values keyed by name."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (R, K, N)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise UsageError(f"{source}: {exc}") from None
    values = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise UsageError(f"{source}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in KEYS:
                raise UsageError(f"{source}: unknown key {key!r} in [{section}]")
            want, parse = KEYS[key]
            if want != section:
                raise UsageError(f"{source}: key {key!r} belongs in [{want}], not [{section}]")
            try:
                values[key] = parse(raw)
            except ValueError as exc:
                raise UsageError(f"{source}: bad value for {key}: {exc}") from None
    return values


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    return read_config_text(text, source=path)


def merge(subcommand: str, file_values: dict, flag_values: dict) -> RunConfig:
    """Defaults, then file values, then flags."""
    cfg = replace(RunConfig(subcommand), **file_values)
    return replace(cfg, **{k: v for k, v in flag_values.items() if v is not None}).validate()


def export_prefix(prefix) -> str:
    """Newline-delimited decimal integers."""
    return "".join(f"{n}\n" for n in prefix)


def read_prefix(text: str) -> list[int]:
    return [int(line) for line in text.splitlines() if line.strip() and not line.startswith("#")]
