"""Job configuration: parsing, validation and canonical serialization."""
from __future__ import annotations

import configparser
import hashlib
import io
import re
from dataclasses import asdict, dataclass, field, fields

from .zmod import is_prime


class ConfigError(ValueError):
    """Bad configuration.  `rule` is a stable machine-readable tag."""

    def __init__(self, field_name: str, rule: str, message: str):
        super().__init__(message)
        self.field = field_name
        self.rule = rule

    def diagnostic(self) -> dict:
        return {"error": "config", "field": self.field, "rule": self.rule, "message": str(self)}


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*(z(?:\s*\^\s*(\d+))?)?")


def parse_poly(text: str, name: str = "polynomial") -> list[int]:
    """Coefficients (constant first) of "3*z^2 - z + 1", or of a comma list "-3,1"."""
    s = text.strip()
    if not s:
        raise ConfigError(name, "syntax", f"empty {name}")
    if "z" not in s:
        try:
            return [int(x) for x in s.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(name, "syntax", f"cannot parse {name} {text!r}") from None
    coeffs: dict[int, int] = {}
    pos = 0
    s = s.replace(" ", "")
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or (not m.group(2) and not m.group(3)):
            raise ConfigError(name, "syntax", f"cannot parse {name} {text!r} at {s[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        c = int(m.group(2)) if m.group(2) else 1
        k = 0 if not m.group(3) else int(m.group(4) or 1)
        coeffs[k] = coeffs.get(k, 0) + sign * c
        pos = m.end()
        if pos < len(s) and s[pos] not in "+-":
            raise ConfigError(name, "syntax", f"cannot parse {name} {text!r} at {s[pos:]!r}")
    out = [0] * (max(coeffs) + 1)
    for k, c in coeffs.items():
        out[k] = c
    return out


def parse_eisenstein(text: str, p: int) -> list[int]:
    """Coefficient list, or the string form for degree <= 2."""
    coeffs = parse_poly(text, "eisenstein")
    if "z" in text and len(coeffs) - 1 > 2:
        raise ConfigError("eisenstein", "string-degree", "the string form is accepted for degree <= 2 only; give coefficients")
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise ConfigError("eisenstein", "degree", "an Eisenstein polynomial has degree >= 1")
    if coeffs[-1] != 1:
        raise ConfigError("eisenstein", "monic", f"leading coefficient must be 1 (got {coeffs[-1]})")
    c0 = coeffs[0]
    if c0 % p or (c0 // p) % p == 0:
        raise ConfigError("eisenstein", "constant-term", f"constant term must be p times a unit, p={p} (got {c0})")
    for k, c in enumerate(coeffs[1:-1], 1):
        if c % p:
            raise ConfigError("eisenstein", "middle-coefficients", f"coefficient of z^{k} must be divisible by p={p} (got {c})")
    return coeffs


def format_poly(c) -> str:
    terms = []
    for k, a in enumerate(c):
        if not a:
            continue
        mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
        if mono and abs(a) == 1:
            body = mono
        else:
            body = f"{abs(a)}*{mono}" if mono else str(abs(a))
        terms.append(("-" if a < 0 else "+", body))
    if not terms:
        return "0"
    s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sg, b in terms[1:]:
        s += f" {sg} {b}"
    return s


@dataclass
class JobConfig:
    p: int = 3
    M: int = 2
    eisenstein: list = field(default_factory=lambda: [-3, 1])
    relations: list = field(default_factory=list)
    i_min: int = 0
    i_max: int = 0
    prec_z: int = 60
    delta_depth: int = 3
    degree: int = 6
    jmax: int = 8
    seed: int = 0
    trials: int = 20
    jobs: int = 1
    format: str = "json"

    def validate(self) -> "JobConfig":
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ConfigError("p", "prime", f"p={self.p} is not prime")
        if self.M < 1:
            raise ConfigError("M", "positive", "M must be >= 1")
        self.eisenstein = parse_eisenstein(",".join(map(str, self.eisenstein)), self.p)
        rels = []
        for r in self.relations:
            r = [int(x) for x in r]
            while len(r) > 1 and r[-1] == 0:
                r.pop()
            if not any(r):
                raise ConfigError("relations", "nonzero", "a relation must be a nonzero polynomial")
            rels.append(r)
        self.relations = rels
        if self.i_min > self.i_max:
            raise ConfigError("i", "range", f"i-min {self.i_min} > i-max {self.i_max}")
        for name in ("prec_z", "delta_depth", "degree", "jmax", "trials", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "positive", f"{name} must be >= 1")
        if self.prec_z <= len(self.eisenstein) - 1:
            raise ConfigError("prec_z", "precision", "z-precision must exceed the degree of E")
        if self.format not in ("json", "csv"):
            raise ConfigError("format", "choice", "format must be json or csv")
        return self

    @property
    def i_values(self):
        return list(range(self.i_min, self.i_max + 1))

    def to_dict(self) -> dict:
        return asdict(self)

    def serialize(self) -> str:
        """Canonical INI text: one [job] section, keys sorted."""
        d = self.to_dict()
        lines = ["[job]"]
        for k in sorted(d):
            v = d[k]
            if k == "eisenstein":
                v = ",".join(map(str, v))
            elif k == "relations":
                v = "; ".join(",".join(map(str, r)) for r in v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()

    @classmethod
    def parse(cls, text: str) -> "JobConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("config", "syntax", f"bad config file: {exc}") from None
        sec = cp["job"] if cp.has_section("job") else {}
        return cls.from_mapping(dict(sec))

    @classmethod
    def from_mapping(cls, m: dict) -> "JobConfig":
        known = {f.name.lower(): f.name for f in fields(cls)}
        kw = {}
        for k, v in m.items():
            k = k.replace("-", "_").lower()
            if k == "i":
                kw["i_min"] = kw["i_max"] = _int(k, v)
                continue
            if k not in known:
                raise ConfigError(k, "unknown-key", f"unknown config key {k!r}")
            kw[known[k]] = v
        p = _int("p", kw.get("p", 3))
        out = {"p": p}
        for k, v in kw.items():
            if k == "eisenstein":
                out[k] = parse_eisenstein(v, p) if isinstance(v, str) else list(v)
            elif k == "relations":
                if isinstance(v, str):
                    out[k] = [parse_poly(s, "relation") for s in v.split(";") if s.strip()]
                else:
                    out[k] = [list(r) for r in v]
            elif k == "format":
                out[k] = str(v).strip()
            elif k != "p":
                out[k] = _int(k, v)
        return cls(**out)


def _int(name, v) -> int:
    try:
        return int(str(v).strip())
    except ValueError:
        raise ConfigError(name, "integer", f"{name} must be an integer (got {v!r})") from None


def read_config(path: str) -> JobConfig:
    with io.open(path, encoding="utf-8") as fh:
        return JobConfig.parse(fh.read())
