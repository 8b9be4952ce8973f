"""Text forms of FamilySpec.

Canonical grammar::

    spec    := NAME [ "(" key "=" number { "," key "=" number } ")" ]
             | "convex" "[" weight ":" spec { ";" weight ":" spec } "]"
             | "reflect" "[" spec "]"
             | "zeroed" "[" prime { "," prime } "]"
    NAME    := uniform | harmonic | zipf | logarithmic | geometric | logzeta

Parameters: zipf(s), logarithmic(s), geometric(s), logzeta(s, alpha).
Whitespace is ignored between tokens. ``format_family`` prints the
canonical form, e.g. ``convex[0.3:harmonic; 0.7:zipf(s=1.01)]``, and
``parse_family(format_family(spec)) == spec``.

The flat key-value form used in config files is
``family=zipf s=1.01 n=1000000``; a convex family is written
``family=convex parts=[0.3:harmonic,0.7:uniform]``.
"""

from __future__ import annotations

import re
from typing import Optional

from .errors import DomainError
from .families import FamilySpec

PARAMS = {
    "uniform": (),
    "harmonic": (),
    "zipf": ("s",),
    "logarithmic": ("s",),
    "geometric": ("s",),
    "logzeta": ("s", "alpha"),
}


class FamilySyntaxError(DomainError):
    def __init__(self, message, text, pos):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.pos = pos


_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_]+")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise FamilySyntaxError(msg, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def name(self):
        self.skip()
        m = _NAME.match(self.text, self.pos)
        if not m:
            self.error("expected a family name")
        self.pos = m.end()
        return m.group(0)

    def number(self):
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("expected a number")
        self.pos = m.end()
        return float(m.group(0))

    def integer(self):
        start = self.pos
        value = self.number()
        if value != int(value):
            self.pos = start
            self.error("expected an integer")
        return int(value)

    def spec(self) -> FamilySpec:
        start = self.pos
        name = self.name()
        if name == "convex":
            self.expect("[")
            parts = []
            while True:
                w = self.number()
                self.expect(":")
                parts.append((w, self.spec()))
                if self.peek() == ";":
                    self.pos += 1
                    continue
                break
            self.expect("]")
            return self._build(lambda: FamilySpec.convex(parts), start)
        if name == "reflect":
            self.expect("[")
            base = self.spec()
            self.expect("]")
            return FamilySpec.reflection(base)
        if name == "zeroed":
            self.expect("[")
            primes = [self.integer()]
            while self.peek() == ",":
                self.pos += 1
                primes.append(self.integer())
            self.expect("]")
            return self._build(lambda: FamilySpec.zeroed(primes), start)
        if name not in PARAMS:
            self.pos = start
            self.error(f"unknown family {name!r}")
        given = {}
        if self.peek() == "(":
            self.pos += 1
            while True:
                key_pos = self.pos
                key = self.name()
                if key not in PARAMS[name]:
                    self.pos = key_pos
                    self.error(f"{name} has no parameter {key!r}")
                if key in given:
                    self.pos = key_pos
                    self.error(f"duplicate parameter {key!r}")
                self.expect("=")
                given[key] = self.number()
                if self.peek() == ",":
                    self.pos += 1
                    continue
                break
            self.expect(")")
        missing = [k for k in PARAMS[name] if k not in given]
        if missing:
            self.error(f"{name} needs parameter(s) {', '.join(missing)}")
        return self._build(lambda: FamilySpec(name, **given), start)

    def _build(self, make, start):
        try:
            return make()
        except FamilySyntaxError:
            raise
        except DomainError as exc:
            raise FamilySyntaxError(str(exc), self.text, start) from None


def parse_family(text: str) -> FamilySpec:
    parser = _Parser(text)
    spec = parser.spec()
    if parser.peek():
        parser.error("unexpected trailing text")
    return spec


def _num(x: float) -> str:
    return repr(float(x))


def format_family(spec: FamilySpec) -> str:
    kind = spec.kind
    if kind in ("uniform", "harmonic"):
        return kind
    if kind in ("zipf", "logarithmic", "geometric"):
        return f"{kind}(s={_num(spec.s)})"
    if kind == "logzeta":
        return f"logzeta(s={_num(spec.s)},alpha={_num(spec.alpha)})"
    if kind == "convex":
        return "convex[" + "; ".join(f"{_num(w)}:{format_family(p)}" for w, p in spec.parts) + "]"
    if kind == "reflection":
        return f"reflect[{format_family(spec.base)}]"
    if kind == "zeroed":
        return "zeroed[" + ",".join(str(p) for p in spec.primes) + "]"
    raise DomainError(f"family {kind!r} has no text form")


def _split_top(text: str, sep: str):
    depth, start, out = 0, 0, []
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == sep and depth == 0:
            out.append(text[start:i])
            start = i + 1
    out.append(text[start:])
    return out


def format_kv(spec: FamilySpec, n: Optional[int] = None) -> str:
    """Flat form, e.g. ``family=zipf s=1.01 n=1000000``."""
    kind = spec.kind
    if kind == "convex":
        body = ",".join(f"{_num(w)}:{format_family(p)}" for w, p in spec.parts)
        fields = [f"family=convex parts=[{body}]"]
    elif kind in PARAMS:
        fields = [f"family={kind}"] + [f"{k}={_num(getattr(spec, k))}" for k in PARAMS[kind]]
    else:
        fields = [f"family={format_family(spec)}"]
    if n is not None:
        fields.append(f"n={int(n)}")
    return " ".join(fields)


def parse_kv(text: str):
    """Inverse of ``format_kv``; returns ``(spec, n)`` with n possibly None."""
    fields = {}
    for token in _split_top(text.strip(), " "):
        if not token:
            continue
        key, eq, value = token.partition("=")
        if not eq:
            raise DomainError(f"expected key=value, got {token!r}")
        if key in fields:
            raise DomainError(f"duplicate key {key!r}")
        fields[key] = value
    if "family" not in fields:
        raise DomainError("missing family=")
    name = fields.pop("family")
    n = fields.pop("n", None)
    if name == "convex":
        parts = fields.pop("parts", "")
        if not (parts.startswith("[") and parts.endswith("]")):
            raise DomainError("convex needs parts=[w:spec,...]")
        spec = parse_family("convex[" + ";".join(_split_top(parts[1:-1], ",")) + "]")
    elif name in PARAMS:
        params = {k: fields.pop(k) for k in PARAMS[name] if k in fields}
        inner = ",".join(f"{k}={v}" for k, v in params.items())
        spec = parse_family(f"{name}({inner})" if inner else name)
    else:
        spec = parse_family(name)
    if fields:
        raise DomainError(f"unknown key(s) {sorted(fields)}")
    return spec, (int(n) if n is not None else None)
