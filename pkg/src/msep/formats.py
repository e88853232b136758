"""Plain-text and binary file formats used by the command line.

Every writer emits a canonical form, so write -> read -> write is
byte-identical. Readers raise FormatError carrying the 1-based line number
of the offending line.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import FormatError
from .graph_core import Graph, grid3
from .msp_core import STAR, MspInstance, PartialAssignment
from .oracle import LmpInstance
from .volume_synth import BinaryVolume, GrayVolume

__all__ = [
    "fmt_real",
    "write_volume",
    "read_volume",
    "dumps_instance",
    "loads_instance",
    "write_instance",
    "read_instance",
    "dumps_separator",
    "loads_separator",
    "dumps_lmp",
    "loads_lmp",
    "dumps_qubo",
    "loads_qubo",
    "dumps_terminals",
    "loads_terminals",
    "dumps_dimacs",
    "loads_dimacs",
    "dumps_partial",
    "loads_partial",
]


def fmt_real(x: float) -> str:
    """17 significant digits: enough for float64 to survive a text round trip."""
    return "%.17g" % x


# ---------------------------------------------------------------- tokenizing


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for no, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if parts:
            yield no, parts


def _int(tok: str, no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"expected integer {what}, got {tok!r}", no) from None


def _real(tok: str, no: int, what: str) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise FormatError(f"expected real {what}, got {tok!r}", no) from None
    if not math.isfinite(x):
        raise FormatError(f"{what} must be finite", no)
    return x


def _node(tok: str, no: int, n: int) -> int:
    v = _int(tok, no, "node id")
    if not 0 <= v < n:
        raise FormatError(f"node id {v} out of range 0..{n - 1}", no)
    return v


def _header(it, magic: str, n_fields: int) -> list[int]:
    try:
        no, parts = next(it)
    except StopIteration:
        raise FormatError(f"empty file, expected {magic} header", 1) from None
    if parts[0] != magic or len(parts) != n_fields + 1:
        raise FormatError(f"expected header '{magic}' with {n_fields} fields", no)
    vals = [_int(p, no, "header field") for p in parts[1:]]
    if any(v < 0 for v in vals):
        raise FormatError("header counts must be nonnegative", no)
    return vals


def _arity(parts: list[str], k: int, no: int) -> None:
    if len(parts) != k:
        raise FormatError(f"'{parts[0]}' line needs {k - 1} fields, got {len(parts) - 1}", no)


def _count(seen: int, want: int, tag: str, last_no: int) -> None:
    if seen != want:
        raise FormatError(f"header announces {want} '{tag}' lines, found {seen}", last_no)


# ---------------------------------------------------------------- volumes


def write_volume(path, vol) -> None:
    """MSEPVOL header line then the payload, x fastest."""
    if isinstance(vol, GrayVolume):
        kind, arr = "gray", np.ascontiguousarray(vol.gray, dtype="<f8")
    elif isinstance(vol, BinaryVolume):
        kind, arr = "bin", np.ascontiguousarray(vol.labels, dtype=np.uint8)
    else:
        raise TypeError("expected GrayVolume or BinaryVolume")
    nz, ny, nx = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"MSEPVOL {kind} {nx} {ny} {nz}\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_volume(path):
    data = Path(path).read_bytes()
    cut = data.find(b"\n")
    if cut < 0:
        raise FormatError("missing MSEPVOL header line", 1)
    parts = data[:cut].decode("ascii", errors="replace").split()
    if len(parts) != 5 or parts[0] != "MSEPVOL" or parts[1] not in ("gray", "bin"):
        raise FormatError("expected 'MSEPVOL <gray|bin> <nx> <ny> <nz>'", 1)
    nx, ny, nz = (_int(p, 1, "dimension") for p in parts[2:])
    if min(nx, ny, nz) < 1:
        raise FormatError("dimensions must be positive", 1)
    payload = data[cut + 1:]
    size = 8 if parts[1] == "gray" else 1
    if len(payload) != nx * ny * nz * size:
        raise FormatError(f"payload has {len(payload)} bytes, expected {nx * ny * nz * size}", 2)
    if parts[1] == "gray":
        return GrayVolume(np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(nz, ny, nx))
    labels = np.frombuffer(payload, dtype=np.uint8).reshape(nz, ny, nx).copy()
    if labels.size and labels.max() > 1:
        raise FormatError("binary payload must hold only 0 and 1", 2)
    return BinaryVolume(labels)


# ---------------------------------------------------------------- instances


def dumps_instance(inst: MspInstance) -> str:
    e = inst.graph.edges()
    out = [f"MSEPINST {inst.node_count} {len(e)} {inst.interaction_count}"]
    out += [f"e {u} {v}" for u, v in e.tolist()]
    out += [f"n {v} {fmt_real(c)}" for v, c in enumerate(inst.node_costs.tolist())]
    out += [f"i {u} {v} {fmt_real(c)}" for u, v, c in inst.interactions()]
    return "\n".join(out) + "\n"


def loads_instance(text: str) -> MspInstance:
    it = _lines(text)
    n, n_e, n_i = _header(it, "MSEPINST", 3)
    edges, iu, iv, ic = [], [], [], []
    costs: list = [None] * n
    n_n = 0
    no = 1
    for no, p in it:
        tag = p[0]
        if tag == "e":
            _arity(p, 3, no)
            edges.append((_node(p[1], no, n), _node(p[2], no, n)))
        elif tag == "n":
            _arity(p, 3, no)
            v = _node(p[1], no, n)
            if costs[v] is not None:
                raise FormatError(f"node {v} has two cost lines", no)
            costs[v] = _real(p[2], no, "node cost")
            n_n += 1
        elif tag == "i":
            _arity(p, 4, no)
            iu.append(_node(p[1], no, n))
            iv.append(_node(p[2], no, n))
            ic.append(_real(p[3], no, "interaction cost"))
        else:
            raise FormatError(f"unknown line tag {tag!r}", no)
    _count(len(edges), n_e, "e", no)
    _count(n_n, n, "n", no)
    _count(len(iu), n_i, "i", no)
    try:
        graph = Graph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2))
        return MspInstance(
            graph,
            (np.asarray(iu, np.int64), np.asarray(iv, np.int64), np.asarray(ic, np.float64)),
            np.asarray(costs, dtype=np.float64),
        )
    except ValueError as exc:
        raise FormatError(str(exc), no) from None


def write_instance(path, inst: MspInstance) -> None:
    Path(path).write_text(dumps_instance(inst), encoding="ascii")


def read_instance(path) -> MspInstance:
    return loads_instance(Path(path).read_text(encoding="ascii"))


# ---------------------------------------------------------------- separators


def dumps_separator(n: int, S) -> str:
    if isinstance(S, np.ndarray) and S.dtype == bool:
        ids = np.flatnonzero(S).tolist()
    else:
        ids = sorted(int(v) for v in S)
    return "\n".join([f"MSEPSEP {n} {len(ids)}"] + [str(v) for v in ids]) + "\n"


def loads_separator(text: str) -> tuple[int, list[int]]:
    it = _lines(text)
    n, k = _header(it, "MSEPSEP", 2)
    ids: list[int] = []
    no = 1
    for no, p in it:
        _arity(["id"] + p, 2, no)
        v = _node(p[0], no, n)
        if ids and v <= ids[-1]:
            raise FormatError("separator ids must be strictly ascending", no)
        ids.append(v)
    _count(len(ids), k, "id", no)
    return n, ids


# ---------------------------------------------------------------- lifted multicut


def dumps_lmp(inst: LmpInstance) -> str:
    e = inst.graph.edges()
    out = [f"MSEPLMP {inst.node_count} {len(e)} {len(inst.lu)}"]
    out += [f"e {u} {v} {fmt_real(c)}" for (u, v), c in zip(e.tolist(), inst.edge_costs.tolist())]
    out += [f"l {u} {v} {fmt_real(c)}" for u, v, c in inst.lifted()]
    return "\n".join(out) + "\n"


def loads_lmp(text: str) -> LmpInstance:
    it = _lines(text)
    n, n_e, n_l = _header(it, "MSEPLMP", 3)
    edges, ecost, lifted = [], [], []
    no = 1
    for no, p in it:
        if p[0] not in ("e", "l"):
            raise FormatError(f"unknown line tag {p[0]!r}", no)
        _arity(p, 4, no)
        row = (_node(p[1], no, n), _node(p[2], no, n), _real(p[3], no, "cost"))
        if p[0] == "e":
            edges.append(row[:2])
            ecost.append(row[2])
        else:
            lifted.append(row)
    _count(len(edges), n_e, "e", no)
    _count(len(lifted), n_l, "l", no)
    try:
        graph = Graph(n, edges)
        # Graph stores edges sorted; realign the costs
        key = {(min(u, v), max(u, v)): c for (u, v), c in zip(edges, ecost)}
        costs = [key[(u, v)] for u, v in graph.edges().tolist()]
        return LmpInstance(graph, costs, lifted)
    except ValueError as exc:
        raise FormatError(str(exc), no) from None


# ---------------------------------------------------------------- QUBO


def dumps_qubo(q: dict, n: int) -> str:
    rows = sorted(((min(i, j), max(i, j)), v) for (i, j), v in q.items())
    return "\n".join([f"MSEPQUBO {n}"] + [f"q {i} {j} {fmt_real(v)}" for (i, j), v in rows]) + "\n"


def loads_qubo(text: str) -> tuple[dict, int]:
    it = _lines(text)
    (n,) = _header(it, "MSEPQUBO", 1)
    q: dict = {}
    for no, p in it:
        if p[0] != "q":
            raise FormatError(f"unknown line tag {p[0]!r}", no)
        _arity(p, 4, no)
        i, j = _node(p[1], no, n), _node(p[2], no, n)
        if i > j:
            raise FormatError("qubo entries need i <= j", no)
        if (i, j) in q:
            raise FormatError(f"duplicate qubo entry ({i}, {j})", no)
        q[(i, j)] = _real(p[3], no, "qubo value")
    return q, n


# ---------------------------------------------------------------- terminal problems


def dumps_terminals(graph: Graph, terminals, weights) -> str:
    e = graph.edges()
    out = [f"MSEPTERM {graph.node_count} {len(e)}"]
    out += [f"e {u} {v}" for u, v in e.tolist()]
    out += [f"w {v} {fmt_real(w)}" for v, w in enumerate(np.asarray(weights, dtype=float).tolist())]
    out += [f"t {v}" for v in terminals]
    return "\n".join(out) + "\n"


def loads_terminals(text: str) -> tuple[Graph, list[int], np.ndarray]:
    """Graph, terminals in file order and node weights (Steiner / vertex separator input)."""
    it = _lines(text)
    n, n_e = _header(it, "MSEPTERM", 2)
    edges, terms = [], []
    w: list = [None] * n
    no = 1
    for no, p in it:
        if p[0] == "e":
            _arity(p, 3, no)
            edges.append((_node(p[1], no, n), _node(p[2], no, n)))
        elif p[0] == "w":
            _arity(p, 3, no)
            v = _node(p[1], no, n)
            w[v] = _real(p[2], no, "weight")
        elif p[0] == "t":
            _arity(p, 2, no)
            terms.append(_node(p[1], no, n))
        else:
            raise FormatError(f"unknown line tag {p[0]!r}", no)
    _count(len(edges), n_e, "e", no)
    if any(x is None for x in w):
        raise FormatError("every node needs a 'w' line", no)
    try:
        return Graph(n, edges), terms, np.asarray(w, dtype=np.float64)
    except ValueError as exc:
        raise FormatError(str(exc), no) from None


# ---------------------------------------------------------------- DIMACS CNF


def dumps_dimacs(formula, n_vars: int | None = None) -> str:
    clauses = [list(c) for c in formula]
    if n_vars is None:
        n_vars = max((abs(l) for c in clauses for l in c), default=0)
    out = [f"p cnf {n_vars} {len(clauses)}"] + [" ".join(str(l) for l in c) + " 0" for c in clauses]
    return "\n".join(out) + "\n"


def loads_dimacs(text: str) -> tuple[list[list[int]], int]:
    """Clauses and variable count; each clause is terminated by 0 on its own line."""
    n_vars = n_cl = None
    clauses: list[list[int]] = []
    no = 0
    for no, p in _lines(text):
        if p[0] == "c":
            continue
        if p[0] == "p":
            if n_vars is not None or len(p) != 4 or p[1] != "cnf":
                raise FormatError("expected a single 'p cnf <vars> <clauses>' line", no)
            n_vars, n_cl = _int(p[2], no, "variable count"), _int(p[3], no, "clause count")
            continue
        if n_vars is None:
            raise FormatError("clause before the 'p cnf' line", no)
        lits = [_int(t, no, "literal") for t in p]
        if lits[-1] != 0 or 0 in lits[:-1]:
            raise FormatError("clause must end with a single 0", no)
        if any(abs(l) > n_vars for l in lits[:-1]):
            raise FormatError("literal exceeds the declared variable count", no)
        clauses.append(lits[:-1])
    if n_vars is None:
        raise FormatError("missing 'p cnf' line", max(no, 1))
    if len(clauses) != n_cl:
        raise FormatError(f"header announces {n_cl} clauses, found {len(clauses)}", max(no, 1))
    return clauses, n_vars


# ---------------------------------------------------------------- partial assignments

_LAB = {0: "0", 1: "1", STAR: "*"}
_UNLAB = {"0": 0, "1": 1, "*": STAR}


def dumps_partial(x: PartialAssignment) -> str:
    out = [f"MSEPPART {len(x.node_labels)} {len(x.interaction_labels)}"]
    out += [f"n {v} {_LAB[int(l)]}" for v, l in enumerate(x.node_labels.tolist())]
    out += [f"i {k} {_LAB[int(l)]}" for k, l in enumerate(x.interaction_labels.tolist())]
    return "\n".join(out) + "\n"


def loads_partial(text: str) -> PartialAssignment:
    it = _lines(text)
    n, m = _header(it, "MSEPPART", 2)
    nl = np.full(n, STAR, dtype=np.int8)
    il = np.full(m, STAR, dtype=np.int8)
    for no, p in it:
        if p[0] not in ("n", "i"):
            raise FormatError(f"unknown line tag {p[0]!r}", no)
        _arity(p, 3, no)
        size = n if p[0] == "n" else m
        k = _int(p[1], no, "index")
        if not 0 <= k < size:
            raise FormatError(f"index {k} out of range", no)
        if p[2] not in _UNLAB:
            raise FormatError("label must be 0, 1 or *", no)
        (nl if p[0] == "n" else il)[k] = _UNLAB[p[2]]
    return PartialAssignment(nl, il)


def grid_for(vol) -> Graph:
    """The 6-connected grid matching a volume's dimensions."""
    return grid3(*vol.dims)
