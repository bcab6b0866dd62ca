"""CPLEX LP text format: writer and a reader for the subset the writer emits.

Every variable is listed in the ``Bounds`` section in index order, so a
write/read round trip keeps variable and row order.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

from .model import BINARY, CONTINUOUS, ModelError, ModelHandle

_NAME = re.compile(r"^[A-Za-z!\"#$%&()/,.;?@_`'{}|~][A-Za-z0-9!\"#$%&()/,.;?@_`'{}|~]*$")
_TERMS_PER_LINE = 8


class LPFormatError(ModelError):
    pass


def _check_name(name: str) -> str:
    if not _NAME.match(name) or len(name) > 255:
        raise LPFormatError(f"name '{name}' is not valid in LP format")
    return name


def _num(v: float) -> str:
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return repr(float(v))


def _expr(pairs) -> list[str]:
    parts = []
    for name, c in pairs:
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_num(abs(c))} {name}")
    if not parts:
        return ["0"]
    return [" ".join(parts[i:i + _TERMS_PER_LINE]) for i in range(0, len(parts), _TERMS_PER_LINE)]


def write_lp(model: ModelHandle, path: str | Path) -> Path:
    names = [_check_name(n) for n in model.var_names]
    lines = [f"\\ Problem: {model.name}", "Minimize" if model.sense == "min" else "Maximize"]
    obj = sorted(model.objective_terms().items())
    body = _expr((names[j], c) for j, c in obj)
    # a zero objective still needs a term for some readers
    if body == ["0"] and names:
        body = [f"+ 0 {names[0]}"]
    lines.append(" obj: " + body[0])
    lines += ["   " + b for b in body[1:]]
    lines.append("Subject To")
    for i, cname in enumerate(model.con_names):
        idx, coef, sense, rhs = model.row(i)
        body = _expr((names[j], c) for j, c in zip(idx.tolist(), coef.tolist()) if c != 0)
        op = {"<=": "<=", ">=": ">=", "==": "="}[sense]
        if body == ["0"]:
            if names:
                body = [f"+ 0 {names[0]}"]
        lines.append(f" {_check_name(cname)}: " + body[0])
        lines += ["   " + b for b in body[1:]]
        lines[-1] += f" {op} {_num(rhs)}"
    lines.append("Bounds")
    for j, n in enumerate(names):
        lb, ub = model.bounds(j)
        if lb == ub:
            lines.append(f" {n} = {_num(lb)}")
        elif math.isinf(lb) and math.isinf(ub):
            lines.append(f" {n} free")
        else:
            lines.append(f" {_num(lb)} <= {n} <= {_num(ub)}")
    bins = [n for j, n in enumerate(names) if model.kind(j) == BINARY]
    if bins:
        lines.append("Binaries")
        lines += [" " + " ".join(bins[i:i + 10]) for i in range(0, len(bins), 10)]
    lines.append("End")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# reader

_SECTIONS = {
    "minimize": "obj", "minimum": "obj", "min": "obj",
    "maximize": "obj", "maximum": "obj", "max": "obj",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "generals": "gen", "general": "gen", "gen": "gen",
    "end": "end",
}


def _parse_number(tok: str) -> float:
    t = tok.lower()
    if t in ("+inf", "inf", "+infinity", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _parse_expr(tokens: list[str]) -> list[tuple[str, float]]:
    out = []
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in ("+", "-"):
            sign = -1.0 if tok == "-" else 1.0
            continue
        try:
            coef = float(tok)
            continue
        except ValueError:
            pass
        out.append((tok, sign * (1.0 if coef is None else coef)))
        sign, coef = 1.0, None
    if coef is not None and coef != 0:
        raise LPFormatError("objective constants are not supported")
    return out


def _tokenize(text: str) -> list[str]:
    text = re.sub(r"([<>=]=?)", r" \1 ", text)
    text = re.sub(r"(?<![eE])([+-])", r" \1 ", text)
    return text.split()


def read_lp(path: str | Path) -> ModelHandle:
    """Read an LP file written by :func:`write_lp` (or a compatible subset)."""
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    name = "model"
    chunks: dict[str, list[str]] = {"obj": [], "st": [], "bounds": [], "bin": [], "gen": []}
    section, sense = None, "min"
    for line in raw:
        if line.startswith("\\"):
            m = re.match(r"\\\s*Problem:\s*(.*)", line)
            if m:
                name = m.group(1).strip()
            continue
        line = line.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "obj":
                sense = "max" if key.startswith("max") else "min"
            if section == "end":
                break
            continue
        if section is None:
            raise LPFormatError(f"text before the first section: {line!r}")
        chunks[section].append(line)

    # objective
    obj_text = " ".join(chunks["obj"])
    if ":" in obj_text:
        obj_text = obj_text.split(":", 1)[1]
    obj = _parse_expr(_tokenize(obj_text))

    # constraints: a new row starts at "name:"; rows end at a relational operator + rhs
    rows = []
    cur: list[str] = []
    for line in chunks["st"]:
        cur.append(line)
        toks = _tokenize(" ".join(cur))
        ops = [i for i, t in enumerate(toks) if t in ("<=", ">=", "=", "<", ">", "=<", "=>")]
        if ops and ops[-1] < len(toks) - 1:
            rows.append(" ".join(cur))
            cur = []
    if cur:
        raise LPFormatError("unterminated constraint")
    parsed_rows = []
    for i, text in enumerate(rows):
        if ":" in text:
            cname, text = text.split(":", 1)
            cname = cname.strip()
        else:
            cname = f"R{i + 1}"
        toks = _tokenize(text)
        k = next(j for j, t in enumerate(toks) if t in ("<=", ">=", "=", "<", ">", "=<", "=>"))
        op = {"<": "<=", "=<": "<=", "<=": "<=", ">": ">=", "=>": ">=", ">=": ">=", "=": "=="}[toks[k]]
        rhs_toks = toks[k + 1:]
        rhs = _parse_number("".join(rhs_toks))
        parsed_rows.append((cname, _parse_expr(toks[:k]), op, rhs))

    # bounds
    order: list[str] = []
    bnds: dict[str, list[float]] = {}

    def touch(v: str) -> list[float]:
        if v not in bnds:
            bnds[v] = [0.0, math.inf]
            order.append(v)
        return bnds[v]

    for line in chunks["bounds"]:
        toks = _tokenize(line)
        joined = []
        i = 0
        while i < len(toks):  # re-attach signs to numbers/inf
            if toks[i] in ("+", "-") and i + 1 < len(toks):
                joined.append(toks[i] + toks[i + 1])
                i += 2
            else:
                joined.append(toks[i])
                i += 1
        toks = joined
        if len(toks) == 2 and toks[1].lower() == "free":
            b = touch(toks[0])
            b[0], b[1] = -math.inf, math.inf
        elif len(toks) == 5:
            b = touch(toks[2])
            b[0], b[1] = _parse_number(toks[0]), _parse_number(toks[4])
        elif len(toks) == 3:
            lhs_is_var = True
            try:
                _parse_number(toks[0])
                lhs_is_var = False
            except ValueError:
                pass
            if lhs_is_var:
                b = touch(toks[0])
                v = _parse_number(toks[2])
                if toks[1] == "=":
                    b[0] = b[1] = v
                elif toks[1] in ("<=", "<", "=<"):
                    b[1] = v
                else:
                    b[0] = v
            else:
                b = touch(toks[2])
                v = _parse_number(toks[0])
                if toks[1] in ("<=", "<", "=<"):
                    b[0] = v
                elif toks[1] == "=":
                    b[0] = b[1] = v
                else:
                    b[1] = v
        else:
            raise LPFormatError(f"cannot parse bound line {line!r}")

    binaries = set(" ".join(chunks["bin"]).split())
    if chunks["gen"]:
        raise LPFormatError("general integer variables are not supported")
    for v, _ in obj:
        touch(v)
    for _, terms, _, _ in parsed_rows:
        for v, _ in terms:
            touch(v)
    for v in sorted(binaries - set(order)):
        touch(v)

    m = ModelHandle(name, sense)
    for v in order:
        lb, ub = bnds[v]
        m.add_var(v, lb, ub, BINARY if v in binaries else CONTINUOUS)
    obj_map: dict[int, float] = {}
    for v, c in obj:
        j = m.var(v)
        obj_map[j] = obj_map.get(j, 0.0) + c
    m.set_objective(obj_map)
    for cname, terms, op, rhs in parsed_rows:
        acc: dict[int, float] = {}
        for v, c in terms:
            j = m.var(v)
            acc[j] = acc.get(j, 0.0) + c
        m.add_constr(cname, acc, op, rhs)
    return m
