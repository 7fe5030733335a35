"""Study configuration files and built-in presets.

Format: INI-style sections ``[domain]``, ``[grading]``, ``[study]`` and
``[solver]`` with ``key = value`` lines and ``#`` comments.  Lists are
bracketed comma-separated pairs, e.g. ``polygon = [(0,0), (1,0), (1,1)]``.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

from .errors import ConfigError, GeometryError
from .geometry import PrismDomain
from .problems import CASE2_FACE, PRISM_SECTION, PROBLEMS, UNIT_SQUARE

K_GUARD = 8

_PAIR = re.compile(r"\(\s*([^(),]+?)\s*,\s*([^(),]+?)\s*\)")


@dataclass
class StudyConfig:
    polygon: tuple
    height: float = 1.0
    ventcel_face: str = "bottom"
    lambda_v: dict = field(default_factory=dict)
    mu: object = 1.0            # float or {corner index: mu}
    nu: float = 1.0
    R0: float | None = None
    k_min: int = 2
    k_max: int = 5
    data: str = "const1"
    rel_tol: float = 1e-10
    max_iter: int | None = None
    out_dir: str = "."

    def domain(self) -> PrismDomain:
        return PrismDomain(self.polygon, self.height, self.ventcel_face, self.lambda_v)

    def validate(self, allow_large=False):
        if self.k_min < 1:
            raise ConfigError("study.k_min: must be at least 1")
        if self.k_max < self.k_min:
            raise ConfigError("study.k_max: must not be below k_min")
        if self.k_max > K_GUARD and not allow_large:
            raise ConfigError(f"study.k_max: {self.k_max} exceeds desk-scale guard "
                              f"{K_GUARD}; pass --allow-large to override")
        mus = self.mu.values() if isinstance(self.mu, dict) else [self.mu]
        if any(not 0 < m <= 1 for m in mus):
            raise ConfigError("grading.mu: values must lie in (0, 1]")
        if not 0 < self.nu <= 1:
            raise ConfigError("grading.nu: must lie in (0, 1]")
        if self.data not in PROBLEMS:
            raise ConfigError(f"study.data: unknown data set {self.data!r}")
        try:
            self.domain()
        except GeometryError as exc:
            raise ConfigError(f"domain: {exc}") from None
        return self


PRESETS = {
    "prism-case-1": dict(polygon=PRISM_SECTION, ventcel_face="bottom", mu=0.58),
    "prism-case-2": dict(polygon=PRISM_SECTION, ventcel_face=CASE2_FACE, mu=0.58),
    "cube": dict(polygon=UNIT_SQUARE, ventcel_face="bottom", mu=1.0,
                 data="manufactured_cube"),
}


def preset(name: str) -> StudyConfig:
    try:
        return StudyConfig(**PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def parse_pairs(text: str) -> list:
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError("expected a bracketed list of pairs")
    body = s[1:-1].strip()
    pairs = _PAIR.findall(body)
    rest = _PAIR.sub("", body).replace(",", "").strip()
    if rest:
        raise ValueError(f"unparseable list content {rest!r}")
    return [(a, b) for a, b in pairs]


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("["):
            current = s.strip("[] ").lower()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.I):
            return no
    return None


_KEYS = {
    "domain": {"polygon", "height", "ventcel_face", "lambda_v"},
    "grading": {"mu", "nu", "r0"},
    "study": {"k_min", "k_max", "data", "out"},
    "solver": {"rel_tol", "max_iter"},
}


def parse_config(text: str, source="<config>") -> StudyConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    def fail(section, key, msg):
        line = _line_of(text, section, key)
        where = f"{source}:{line}: " if line else f"{source}: "
        raise ConfigError(f"{where}{section}.{key}: {msg}")

    for sec in cp.sections():
        if sec not in _KEYS:
            raise ConfigError(f"{source}: unknown section [{sec}]")
        for key in cp[sec]:
            if key not in _KEYS[sec]:
                fail(sec, key, "unknown key")

    def get(section, key, conv, default=None):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key).strip()
        if raw == "":
            return default
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            fail(section, key, str(exc))

    def polygon(raw):
        return tuple((float(a), float(b)) for a, b in parse_pairs(raw))

    def lambda_v(raw):
        return {int(a): _float(b) for a, b in parse_pairs(raw)}

    def mu(raw):
        if raw.startswith("["):
            return {int(a): float(b) for a, b in parse_pairs(raw)}
        return float(raw)

    poly = get("domain", "polygon", polygon)
    if poly is None:
        raise ConfigError(f"{source}: domain.polygon: required")
    cfg = StudyConfig(
        polygon=poly,
        height=get("domain", "height", float, 1.0),
        ventcel_face=get("domain", "ventcel_face", str, "bottom"),
        lambda_v=get("domain", "lambda_v", lambda_v, {}),
        mu=get("grading", "mu", mu, 1.0),
        nu=get("grading", "nu", float, 1.0),
        R0=get("grading", "r0", float, None),
        k_min=get("study", "k_min", int, 2),
        k_max=get("study", "k_max", int, 5),
        data=get("study", "data", str, "const1"),
        out_dir=get("study", "out", str, "."),
        rel_tol=get("solver", "rel_tol", float, 1e-10),
        max_iter=get("solver", "max_iter", int, None),
    )
    return cfg


def _float(s: str) -> float:
    s = s.strip().lower()
    return math.inf if s in ("inf", "+inf", "infinity") else float(s)


def load_config(path) -> StudyConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def dump_config(cfg: StudyConfig) -> str:
    """Render a config in the file format accepted by :func:`parse_config`."""
    def pairs(items):
        return "[" + ", ".join(f"({a!r}, {b!r})" for a, b in items) + "]"

    mu = pairs(sorted(cfg.mu.items())) if isinstance(cfg.mu, dict) else repr(cfg.mu)
    lines = ["[domain]", f"polygon = {pairs(cfg.polygon)}", f"height = {cfg.height!r}",
             f"ventcel_face = {cfg.ventcel_face}"]
    if cfg.lambda_v:
        lines.append(f"lambda_v = {pairs(sorted(cfg.lambda_v.items()))}")
    lines += ["", "[grading]", f"mu = {mu}", f"nu = {cfg.nu!r}"]
    if cfg.R0 is not None:
        lines.append(f"R0 = {cfg.R0!r}")
    lines += ["", "[study]", f"k_min = {cfg.k_min}", f"k_max = {cfg.k_max}",
              f"data = {cfg.data}", f"out = {cfg.out_dir}",
              "", "[solver]", f"rel_tol = {cfg.rel_tol!r}"]
    if cfg.max_iter is not None:
        lines.append(f"max_iter = {cfg.max_iter}")
    return "\n".join(lines) + "\n"
