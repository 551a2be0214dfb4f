"""Text formats for models, candidates and Cattaneo specifications.

All files are sectioned: a ``[name]`` header followed either by
``key = value`` lines or, for candidate files, a bare expression body.
``#`` starts a comment line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ExprSyntaxError, InputError
from .expr import ZERO, parse_expr, render
from .model import BalanceSystem
from .sbl import SblCandidate
from .zoo.cattaneo import CattaneoSblParams, CattaneoSpec

_HEADER = re.compile(r"^\[([A-Za-z0-9_.]+)\]\s*$")


class FileFormatError(InputError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {message}")


@dataclass
class Section:
    name: str
    line: int
    lines: list  # (line number, text)

    def pairs(self, path) -> dict:
        out = {}
        for no, text in self.lines:
            if "=" not in text:
                raise FileFormatError(path, no, f"expected 'key = value' in [{self.name}]")
            key, value = text.split("=", 1)
            key = key.strip()
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", key):
                raise FileFormatError(path, no, f"invalid key {key!r}")
            if key in out:
                raise FileFormatError(path, no, f"duplicate key {key!r}")
            out[key] = (no, value.strip())
        return out

    def body(self, path) -> tuple:
        if not self.lines:
            raise FileFormatError(path, self.line, f"section [{self.name}] is empty")
        return self.lines[0][0], " ".join(t for _, t in self.lines)


def parse_sections(text: str, path="<string>") -> dict:
    sections = {}
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _HEADER.match(line)
        if m:
            name = m.group(1)
            if name in sections:
                raise FileFormatError(path, no, f"duplicate section [{name}]")
            current = sections[name] = Section(name, no, [])
            continue
        if current is None:
            raise FileFormatError(path, no, "content before the first section header")
        current.lines.append((no, line))
    return sections


def _expr(path, line, text):
    try:
        return parse_expr(text)
    except ExprSyntaxError as exc:
        raise FileFormatError(path, line, exc.args[0]) from None


def _float(path, line, text):
    try:
        return float(text)
    except ValueError:
        raise FileFormatError(path, line, f"expected a number, got {text!r}") from None


def _interval(path, line, text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise FileFormatError(path, line, "expected an interval 'lo, hi'")
    lo, hi = (_float(path, line, p) for p in parts)
    if not lo <= hi:
        raise FileFormatError(path, line, "interval needs lo <= hi")
    return lo, hi


def _require(sections, name, path):
    if name not in sections:
        raise FileFormatError(path, 0, f"missing section [{name}]")
    return sections[name]


def _per_field(section, fields, path, required=True):
    pairs = section.pairs(path) if section else {}
    unknown = set(pairs) - set(fields)
    if unknown:
        no = pairs[sorted(unknown)[0]][0]
        raise FileFormatError(path, no, f"unknown field {sorted(unknown)[0]!r}")
    out = []
    for f in fields:
        if f in pairs:
            no, text = pairs[f]
            out.append(_expr(path, no, text))
        elif required:
            raise FileFormatError(path, section.line, f"[{section.name}] misses field {f!r}")
        else:
            out.append(ZERO)
    return out


# -- models ----------------------------------------------------------------

def loads_model(text: str, path="<string>") -> BalanceSystem:
    secs = parse_sections(text, path)
    sysec = _require(secs, "system", path).pairs(path)
    name = sysec.get("name", (0, "system"))[1]
    if "spatial_dim" not in sysec:
        raise FileFormatError(path, secs["system"].line, "[system] needs spatial_dim")
    no, dim_text = sysec["spatial_dim"]
    try:
        n = int(dim_text)
    except ValueError:
        raise FileFormatError(path, no, "spatial_dim must be an integer") from None
    if not 1 <= n <= 3:
        raise FileFormatError(path, no, "spatial_dim must be 1, 2 or 3")
    fsec = _require(secs, "fields", path)
    fields, box = [], []
    for no, text in fsec.lines:
        if "=" in text:
            key, val = (s.strip() for s in text.split("=", 1))
            box.append(_interval(path, no, val))
        else:
            key = text.strip()
            box.append((-1.0, 1.0))
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", key):
            raise FileFormatError(path, no, f"invalid field name {key!r}")
        fields.append(key)
    if not fields:
        raise FileFormatError(path, fsec.line, "no fields declared")
    dens = _per_field(_require(secs, "density", path), fields, path)
    fluxes = [_per_field(_require(secs, f"flux.{A}", path), fields, path) for A in range(1, n + 1)]
    extra = [s for s in secs if s.startswith("flux.") and s not in {f"flux.{A}" for A in range(1, n + 1)}]
    if extra:
        raise FileFormatError(path, secs[extra[0]].line, f"section [{extra[0]}] exceeds spatial_dim")
    prods = _per_field(secs.get("production"), fields, path, required=False)
    try:
        return BalanceSystem(
            field_names=tuple(fields),
            spatial_dim=n,
            densities=tuple(dens),
            fluxes=tuple(tuple(r) for r in fluxes),
            productions=tuple(prods),
            domain_box=tuple(box),
            name=name,
        )
    except InputError as exc:
        raise FileFormatError(path, 0, str(exc)) from None


def dumps_model(sys: BalanceSystem) -> str:
    out = ["[system]", f"name = {sys.name}", f"spatial_dim = {sys.n}", "", "[fields]"]
    out += [f"{f} = {lo!r}, {hi!r}" for f, (lo, hi) in zip(sys.field_names, sys.domain_box)]
    out += ["", "[density]"] + [f"{f} = {render(e)}" for f, e in zip(sys.field_names, sys.densities)]
    for A, row in enumerate(sys.fluxes, start=1):
        out += ["", f"[flux.{A}]"] + [f"{f} = {render(e)}" for f, e in zip(sys.field_names, row)]
    out += ["", "[production]"] + [f"{f} = {render(e)}" for f, e in zip(sys.field_names, sys.productions)]
    return "\n".join(out) + "\n"


# -- candidates ------------------------------------------------------------

def loads_candidate(text: str, path="<string>") -> SblCandidate:
    secs = parse_sections(text, path)
    no, body = _require(secs, "K0", path).body(path)
    K0 = _expr(path, no, body)
    KA = []
    A = 1
    while f"K.{A}" in secs:
        no, body = secs[f"K.{A}"].body(path)
        KA.append(_expr(path, no, body))
        A += 1
    if not KA:
        raise FileFormatError(path, 0, "missing section [K.1]")
    stray = [s for s in secs if s not in {"K0", "Q"} | {f"K.{i}" for i in range(1, A)}]
    if stray:
        raise FileFormatError(path, secs[stray[0]].line, f"unexpected section [{stray[0]}]")
    if "Q" in secs:
        no, body = secs["Q"].body(path)
        Q = _expr(path, no, body)
    else:
        Q = ZERO
    return SblCandidate(K0=K0, KA=tuple(KA), Q=Q)


def dumps_candidate(cand: SblCandidate) -> str:
    out = ["[K0]", render(cand.K0)]
    for A, k in enumerate(cand.KA, start=1):
        out += ["", f"[K.{A}]", render(k)]
    out += ["", "[Q]", render(cand.Q)]
    return "\n".join(out) + "\n"


# -- Cattaneo specification and parameters ---------------------------------

def loads_cattaneo_spec(text: str, path="<string>") -> CattaneoSpec:
    secs = parse_sections(text, path)
    pairs = _require(secs, "cattaneo", path).pairs(path)
    exprs = {}
    for key in ("tau", "Lambda", "eps_eq"):
        if key not in pairs:
            raise FileFormatError(path, secs["cattaneo"].line, f"[cattaneo] needs {key}")
        exprs[key] = _expr(path, *pairs[key])
    theta = _interval(path, *pairs["theta"]) if "theta" in pairs else (0.5, 2.0)
    q = _interval(path, *pairs["q"]) if "q" in pairs else (-1.0, 1.0)
    theta0 = _float(path, *pairs["theta0"]) if "theta0" in pairs else None
    unknown = set(pairs) - {"tau", "Lambda", "eps_eq", "theta", "q", "theta0"}
    if unknown:
        k = sorted(unknown)[0]
        raise FileFormatError(path, pairs[k][0], f"unknown key {k!r}")
    try:
        return CattaneoSpec(box=(theta, q, q, q), theta0=theta0, **exprs)
    except InputError as exc:
        raise FileFormatError(path, 0, str(exc)) from None


def dumps_cattaneo_spec(spec: CattaneoSpec) -> str:
    (t0, t1), (q0, q1) = spec.box[0], spec.box[1]
    return (
        "[cattaneo]\n"
        f"tau = {render(spec.tau)}\nLambda = {render(spec.Lambda)}\neps_eq = {render(spec.eps_eq)}\n"
        f"theta = {t0!r}, {t1!r}\nq = {q0!r}, {q1!r}\ntheta0 = {spec.theta0!r}\n"
    )


_PARAM_KEYS = {"lambda0_hat", "Khat1", "Khat2", "Khat3", "alpha", "a0", "k1", "k2", "k3", "m1", "m2", "m3", "f0"}


def loads_cattaneo_params(text: str, path="<string>") -> CattaneoSblParams:
    secs = parse_sections(text, path)
    pairs = _require(secs, "params", path).pairs(path)
    unknown = set(pairs) - _PARAM_KEYS
    if unknown:
        k = sorted(unknown)[0]
        raise FileFormatError(path, pairs[k][0], f"unknown key {k!r}")
    if "lambda0_hat" not in pairs:
        raise FileFormatError(path, secs["params"].line, "[params] needs lambda0_hat")

    def num(key, default=0.0):
        return _float(path, *pairs[key]) if key in pairs else default

    def ex(key):
        return _expr(path, *pairs[key]) if key in pairs else ZERO

    try:
        return CattaneoSblParams(
            lambda0_hat=ex("lambda0_hat"),
            Khat=tuple(ex(f"Khat{i}") for i in (1, 2, 3)),
            alpha=num("alpha", 1.0),
            a0=num("a0"),
            k=tuple(num(f"k{i}") for i in (1, 2, 3)),
            m=tuple(num(f"m{i}") for i in (1, 2, 3)),
            f0=num("f0"),
        )
    except InputError as exc:
        raise FileFormatError(path, 0, str(exc)) from None


def dumps_cattaneo_params(p: CattaneoSblParams) -> str:
    out = ["[params]", f"lambda0_hat = {render(p.lambda0_hat)}"]
    out += [f"Khat{i} = {render(e)}" for i, e in enumerate(p.Khat, start=1)]
    out += [f"alpha = {p.alpha!r}", f"a0 = {p.a0!r}"]
    out += [f"k{i} = {v!r}" for i, v in enumerate(p.k, start=1)]
    out += [f"m{i} = {v!r}" for i, v in enumerate(p.m, start=1)]
    out += [f"f0 = {p.f0!r}"]
    return "\n".join(out) + "\n"


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(path, 0, exc.strerror or str(exc)) from None


def load_model(path) -> BalanceSystem:
    return loads_model(read_text(path), str(path))


def load_candidate(path) -> SblCandidate:
    return loads_candidate(read_text(path), str(path))


def load_cattaneo_spec(path) -> CattaneoSpec:
    return loads_cattaneo_spec(read_text(path), str(path))


def load_cattaneo_params(path) -> CattaneoSblParams:
    return loads_cattaneo_params(read_text(path), str(path))
