"""The line-oriented instance file format.

    CSPv1
    algebra <universe_size> <wnu_arity>
    w <a1> ... <am> <result>        # universe_size^arity lines, lexicographic
    var <name> <e1> <e2> ...
    rel <name> <arity> <ntuples>
    <v1> ... <varity>               # ntuples bare tuple lines
    cstr <relname> <var1> ... <varK>

'#' starts a comment, tokens are whitespace-separated, text is UTF-8.
Element indices are 0-based.  Every declared relation is verified preserved
by the declared operation at load time; variable domains must be closed
under it.  Constraints may repeat a variable, in which case the relation is
restricted to the matching diagonal and the scope deduplicated.
"""

from __future__ import annotations

import itertools

from .algebra import OperationTable, derive_special_wnu, is_idempotent, is_wnu
from .errors import InputFormatError
from .instance import Constraint, CspInstance, make_instance
from .relations import Domain, RelationTable, preserved_by, relation

__all__ = ["parse_instance", "serialize_instance", "load_algebra"]


def _tokenize(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _fail(lineno: int, message: str):
    raise InputFormatError(f"line {lineno}: {message}")


def _parse_algebra(rows, start_idx) -> tuple[OperationTable, int]:
    lineno, toks = rows[start_idx]
    if toks[0] != "algebra" or len(toks) != 3:
        _fail(lineno, "expected 'algebra <universe_size> <wnu_arity>'")
    try:
        size, arity = int(toks[1]), int(toks[2])
    except ValueError:
        _fail(lineno, "algebra sizes must be integers")
    if size < 1 or arity < 1:
        _fail(lineno, "algebra sizes must be positive")
    n_rows = size**arity
    table = []
    idx = start_idx + 1
    for expected in itertools.product(range(size), repeat=arity):
        if idx >= len(rows):
            _fail(rows[-1][0], "algebra table ends early")
        lineno, toks = rows[idx]
        if toks[0] != "w" or len(toks) != arity + 2:
            _fail(lineno, f"expected 'w <a1> .. <a{arity}> <result>'")
        try:
            args = tuple(int(t) for t in toks[1:-1])
            value = int(toks[-1])
        except ValueError:
            _fail(lineno, "algebra entries must be integers")
        if args != expected:
            _fail(lineno, f"algebra rows must be lexicographic; expected {expected}")
        if not 0 <= value < size:
            _fail(lineno, "operation value outside the universe")
        table.append(value)
        idx += 1
    return OperationTable(arity, size, tuple(table)), idx


def load_algebra(path: str) -> OperationTable:
    """An operation table from a file holding only the header and algebra block."""
    with open(path, encoding="utf-8") as fh:
        rows = list(_tokenize(fh.read()))
    if not rows or rows[0][1] != ["CSPv1"]:
        raise InputFormatError("missing CSPv1 header")
    op, idx = _parse_algebra(rows, 1)
    if idx != len(rows):
        _fail(rows[idx][0], "unexpected content after the algebra block")
    return op


def parse_instance(text: str) -> CspInstance:
    """Parse and validate; raises InputFormatError on any malformed input."""
    rows = list(_tokenize(text))
    if not rows or rows[0][1] != ["CSPv1"]:
        raise InputFormatError("missing CSPv1 header")
    declared, idx = _parse_algebra(rows, 1)
    if not (is_idempotent(declared) and is_wnu(declared)):
        raise InputFormatError("declared operation is not an idempotent WNU")

    var_names: list[str] = []
    var_domains: list[Domain] = []
    var_index: dict[str, int] = {}
    relations: dict[str, RelationTable] = {}
    raw_tuples: dict[str, list[tuple[int, ...]]] = {}
    constraints: list[Constraint] = []

    universe = Domain(tuple(range(declared.universe_size)))

    while idx < len(rows):
        lineno, toks = rows[idx]
        kind = toks[0]
        if kind == "var":
            if len(toks) < 3:
                _fail(lineno, "var needs a name and at least one element")
            name = toks[1]
            if name in var_index:
                _fail(lineno, f"duplicate variable {name!r}")
            try:
                elems = sorted({int(t) for t in toks[2:]})
            except ValueError:
                _fail(lineno, "variable elements must be integers")
            if any(e < 0 or e >= declared.universe_size for e in elems):
                _fail(lineno, "variable element outside the universe")
            var_index[name] = len(var_names)
            var_names.append(name)
            var_domains.append(Domain(tuple(elems)))
            idx += 1
        elif kind == "rel":
            if len(toks) != 4:
                _fail(lineno, "expected 'rel <name> <arity> <ntuples>'")
            name = toks[1]
            if name in relations:
                _fail(lineno, f"duplicate relation {name!r}")
            try:
                arity, ntuples = int(toks[2]), int(toks[3])
            except ValueError:
                _fail(lineno, "rel sizes must be integers")
            if arity < 1 or ntuples < 0:
                _fail(lineno, "rel sizes out of range")
            idx += 1
            tuples = []
            for _ in range(ntuples):
                if idx >= len(rows):
                    _fail(lineno, f"relation {name!r} is missing tuple lines")
                tl_lineno, tl = rows[idx]
                if len(tl) != arity:
                    _fail(tl_lineno, f"tuple line needs {arity} integers")
                try:
                    t = tuple(int(x) for x in tl)
                except ValueError:
                    _fail(tl_lineno, "tuple entries must be integers")
                if any(x < 0 or x >= declared.universe_size for x in t):
                    _fail(tl_lineno, "tuple entry outside the universe")
                tuples.append(t)
                idx += 1
            rel = relation(tuple(universe for _ in range(arity)), tuples)
            if not preserved_by(rel, declared):
                _fail(lineno, f"relation {name!r} is not preserved by the operation")
            relations[name] = rel
            raw_tuples[name] = tuples
        elif kind == "cstr":
            if len(toks) < 3:
                _fail(lineno, "expected 'cstr <relname> <var...>'")
            rel_name = toks[1]
            if rel_name not in relations:
                _fail(lineno, f"unknown relation {rel_name!r}")
            names = toks[2:]
            for nm in names:
                if nm not in var_index:
                    _fail(lineno, f"unknown variable {nm!r}")
            rel = relations[rel_name]
            if len(names) != rel.arity:
                _fail(lineno, "constraint scope length differs from relation arity")
            scope = tuple(var_index[nm] for nm in names)
            if len(set(scope)) != len(scope):
                scope, rel = _diagonal_restrict(scope, rel)
            for pos, v in enumerate(scope):
                dom = var_domains[v]
                rel = relation(
                    rel.coord_domains[:pos] + (dom,) + rel.coord_domains[pos + 1 :],
                    {t for t in rel.tuples if t[pos] in dom},
                )
            constraints.append(Constraint(scope, rel))
            idx += 1
        else:
            _fail(lineno, f"unknown directive {kind!r}")

    try:
        return make_instance(
            var_names,
            var_domains,
            constraints,
            derive_special_wnu(declared),
            check_preservation=False,
        )
    except Exception as exc:  # noqa: BLE001 - surface as a format problem
        raise InputFormatError(str(exc)) from exc


def _diagonal_restrict(scope, rel: RelationTable):
    """Collapse repeated scope variables onto the diagonal of the relation."""
    first_pos: dict[int, int] = {}
    keep_positions: list[int] = []
    for pos, v in enumerate(scope):
        if v not in first_pos:
            first_pos[v] = pos
            keep_positions.append(pos)
    tuples = {
        tuple(t[p] for p in keep_positions)
        for t in rel.tuples
        if all(t[pos] == t[first_pos[v]] for pos, v in enumerate(scope))
    }
    new_scope = tuple(scope[p] for p in keep_positions)
    domains = tuple(rel.coord_domains[p] for p in keep_positions)
    return new_scope, RelationTable(len(new_scope), domains, frozenset(tuples))


def serialize_instance(inst: CspInstance) -> str:
    """Textual form; distinct relation tables are shared and named r0, r1, ..."""
    lines = ["CSPv1"]
    w = inst.algebra
    lines.append(f"algebra {w.universe_size} {w.arity}")
    for args in itertools.product(range(w.universe_size), repeat=w.arity):
        lines.append("w " + " ".join(map(str, args)) + f" {w.apply(args)}")
    for name, dom in zip(inst.var_names, inst.domains):
        lines.append(f"var {name} " + " ".join(map(str, dom.elements)))
    rel_names: dict = {}
    for c in inst.constraints:
        key = (c.relation.arity, tuple(sorted(c.relation.tuples)))
        if key not in rel_names:
            name = f"r{len(rel_names)}"
            rel_names[key] = name
            lines.append(f"rel {name} {c.relation.arity} {len(c.relation.tuples)}")
            for t in sorted(c.relation.tuples):
                lines.append(" ".join(map(str, t)))
    for c in inst.constraints:
        key = (c.relation.arity, tuple(sorted(c.relation.tuples)))
        lines.append(
            f"cstr {rel_names[key]} "
            + " ".join(inst.var_names[v] for v in c.scope)
        )
    return "\n".join(lines) + "\n"
