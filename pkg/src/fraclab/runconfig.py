"""Flat key = value experiment configs with [section] headers.

The format is line-oriented and diff-friendly: comments start with '#',
sections group keys per module, values are scalars or comma/space
separated lists.  Parse errors carry 1-based line and column numbers.

Schema (sections and keys understood by the experiment drivers):

  [experiment]  name = getoor | symbol | elliptic-regularity |
                parabolic-energy | semigroup-contraction | product-rule |
                g-bound | regularity-sweep | boundary-profile
                seed = <int>         (optional, default 0)
  [params]      s = <float in (0,1)>     (or list for multi-s recipes)
                ndim = 1 | 2
  [grid]        n = <int or list>        (refinement levels)
                box = lo, hi             (1D)  or  lo, lo, hi, hi (2D)
  [omega]       kind = ball | box,  center/radius or bounds
  [inner]       optional probe region (same keys as [omega])
  [source]      profile = constant | jump | power | bump | csv
                value/exponent/path ... per profile
  [time]        T = <float>, nt = <int or list>, theta = <float or list>
  [probe]       p = <float>, sweep = <list of sigma>, levels = <int>,
                rate_threshold = <float>
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass
class ConfigValue:
    raw: str
    line: int
    column: int


@dataclass
class RunConfig:
    path: str
    sections: dict = field(default_factory=dict)

    def section(self, name):
        return self.sections.get(name, {})

    def has(self, section, key):
        return key in self.section(section)

    def _value(self, section, key, default, required):
        sec = self.section(section)
        if key not in sec:
            if required:
                raise ConfigError(f"missing key '{key}' in section [{section}]",
                                  path=self.path)
            return None, default
        return sec[key], default

    def get_str(self, section, key, default=None, required=False):
        cv, d = self._value(section, key, default, required)
        return cv.raw if cv is not None else d

    def get_int(self, section, key, default=None, required=False):
        cv, d = self._value(section, key, default, required)
        if cv is None:
            return d
        try:
            return int(cv.raw)
        except ValueError:
            raise ConfigError(f"expected integer for {key}, got {cv.raw!r}",
                              cv.line, cv.column, self.path) from None

    def get_float(self, section, key, default=None, required=False):
        cv, d = self._value(section, key, default, required)
        if cv is None:
            return d
        try:
            return float(cv.raw)
        except ValueError:
            raise ConfigError(f"expected number for {key}, got {cv.raw!r}",
                              cv.line, cv.column, self.path) from None

    def get_floats(self, section, key, default=None, required=False):
        cv, d = self._value(section, key, default, required)
        if cv is None:
            return d
        try:
            return [float(tok) for tok in cv.raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"expected numbers for {key}, got {cv.raw!r}",
                              cv.line, cv.column, self.path) from None

    def get_ints(self, section, key, default=None, required=False):
        vals = self.get_floats(section, key, default, required)
        if vals is default or vals is None:
            return vals
        out = []
        for v in vals:
            if v != int(v):
                cv = self.section(section)[key]
                raise ConfigError(f"expected integers for {key}, got {cv.raw!r}",
                                  cv.line, cv.column, self.path)
            out.append(int(v))
        return out

    def region(self, section, required=False):
        sec = self.section(section)
        if not sec:
            if required:
                raise ConfigError(f"missing region section [{section}]", path=self.path)
            return None
        from .regions import region_from_mapping

        kv = {k: v.raw for k, v in sec.items()}
        try:
            return region_from_mapping(kv, where=f"[{section}] ")
        except ConfigError as exc:
            first = next(iter(sec.values()))
            raise ConfigError(str(exc), first.line, first.column, self.path) from None

    def echo(self):
        return {name: {k: v.raw for k, v in sec.items()}
                for name, sec in self.sections.items()}


def parse_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, path)


def parse_config_text(text, path="<config>"):
    cfg = RunConfig(path=path)
    current = None
    for ln, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]") or len(stripped) < 3:
                raise ConfigError("malformed section header", ln, indent + 1, path)
            name = stripped[1:-1].strip()
            if not name:
                raise ConfigError("empty section name", ln, indent + 1, path)
            if name in cfg.sections:
                raise ConfigError(f"duplicate section [{name}]", ln, indent + 1, path)
            cfg.sections[name] = {}
            current = name
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", ln, indent + 1, path)
        if current is None:
            raise ConfigError("key outside any [section]", ln, indent + 1, path)
        key, _, value = line.partition("=")
        key_stripped = key.strip()
        if not key_stripped:
            raise ConfigError("empty key", ln, indent + 1, path)
        value = value.split("#", 1)[0].strip()
        if not value:
            col = line.index("=") + 2
            raise ConfigError(f"empty value for key '{key_stripped}'", ln, col, path)
        if key_stripped in cfg.sections[current]:
            raise ConfigError(f"duplicate key '{key_stripped}' in [{current}]",
                              ln, indent + 1, path)
        col = line.index(value, line.index("=")) + 1
        cfg.sections[current][key_stripped] = ConfigValue(value, ln, col)
    return cfg
