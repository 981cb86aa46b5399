"""Maximum-weight matching on general graphs.

The solver is the primal-dual blossom method (Edmonds, with Galil's O(n^3)
bookkeeping). It maximises total weight only; cardinality is not forced.
A brute-force enumerator is kept alongside it as a verification oracle.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

Node = Hashable


class TooLarge(ValueError):
    pass


@dataclass
class WeightedGraph:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)  # (a, b, weight)

    def __post_init__(self) -> None:
        seen = set()
        known = set(self.nodes)
        for a, b, _w in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            key = frozenset((a, b))
            if key in seen:
                raise ValueError(f"duplicate edge {a!r}-{b!r}")
            seen.add(key)
            for x in (a, b):
                if x not in known:
                    known.add(x)
                    self.nodes.append(x)


@dataclass(frozen=True)
class Matching:
    pairs: tuple  # sorted tuple of (a, b) with a < b
    total_weight: float

    def nodes(self) -> set:
        out = set()
        for a, b in self.pairs:
            out.add(a)
            out.add(b)
        return out


def _key(x):
    return (type(x).__name__, x)


def _norm_pair(a, b):
    return (a, b) if _key(a) <= _key(b) else (b, a)


def _as_matching(pairs, wmap) -> Matching:
    pairs = sorted((_norm_pair(a, b) for a, b in pairs), key=lambda p: (_key(p[0]), _key(p[1])))
    total = 0.0
    for p in pairs:
        total += wmap[frozenset(p)]
    return Matching(tuple(pairs), total)


def max_weight_matching(g: WeightedGraph | Sequence[tuple]) -> Matching:
    """Exact maximum-weight matching of ``g``.

    Edges with weight <= 0 are discarded up front. Edges are ordered by
    (weight desc, pair asc) before solving so the result is reproducible
    for a given edge set regardless of input order.
    """
    edges = g.edges if isinstance(g, WeightedGraph) else list(g)
    pos = [(_norm_pair(a, b), float(w)) for a, b, w in edges if w > 0]
    if not pos:
        return Matching((), 0.0)
    pos.sort(key=lambda e: (-e[1], _key(e[0][0]), _key(e[0][1])))
    wmap = {frozenset(p): w for p, w in pos}

    # solve each connected component separately; much cheaper on sparse slots
    index: dict = {}
    for (a, b), _w in pos:
        for x in (a, b):
            if x not in index:
                index[x] = len(index)
    parent = list(range(len(index)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for (a, b), _w in pos:
        ra, rb = find(index[a]), find(index[b])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict = {}
    for (a, b), w in pos:
        comps.setdefault(find(index[a]), []).append((a, b, w))

    pairs = []
    for root in sorted(comps):
        comp = comps[root]
        if len(comp) == 1:
            a, b, _w = comp[0]
            pairs.append((a, b))
            continue
        local: dict = {}
        names = []
        iedges = []
        for a, b, w in comp:
            for x in (a, b):
                if x not in local:
                    local[x] = len(names)
                    names.append(x)
            iedges.append((local[a], local[b], w))
        mate = _solver()(len(names), iedges)
        for i, j in enumerate(mate):
            if j > i:
                pairs.append((names[i], names[j]))
    return _as_matching(pairs, wmap)


def brute_force_matching(g: WeightedGraph | Sequence[tuple], max_nodes: int = 16) -> Matching:
    """Exhaustively search every matching; return a heaviest one.

    The search walks vertices in sorted order and either leaves the lowest
    remaining vertex unmatched or pairs it with each remaining neighbour;
    results are memoised on the remaining-vertex set. Ties go to the
    lexicographically smallest sorted pair list. Raises ``TooLarge`` above
    ``max_nodes`` vertices.
    """
    if isinstance(g, WeightedGraph):
        nodes, edges = list(g.nodes), g.edges
    else:
        edges = list(g)
        nodes = []
        for a, b, _w in edges:
            for x in (a, b):
                if x not in nodes:
                    nodes.append(x)
    if len(nodes) > max_nodes:
        raise TooLarge(f"{len(nodes)} nodes > {max_nodes}")
    order = sorted(nodes, key=_key)
    idx = {x: i for i, x in enumerate(order)}
    n = len(order)
    wmat: dict = {}
    for a, b, w in edges:
        i, j = sorted((idx[a], idx[b]))
        wmat[(i, j)] = float(w)
    nbrs = [sorted(j for (i, j) in wmat if i == x) for x in range(n)]

    memo: dict = {}

    def best(mask: int):
        # mask: bit set of still-available vertices
        if mask == 0:
            return 0.0, ()
        if mask in memo:
            return memo[mask]
        x = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << x)
        cand_w, cand_p = best(rest)
        for y in nbrs[x]:
            if rest >> y & 1:
                sw, sp = best(rest & ~(1 << y))
                w = wmat[(x, y)] + sw
                p = ((x, y),) + sp
                if w > cand_w or (w == cand_w and p < cand_p):
                    cand_w, cand_p = w, p
        memo[mask] = (cand_w, cand_p)
        return memo[mask]

    _w, ipairs = best((1 << n) - 1)
    pairs = [(order[i], order[j]) for i, j in ipairs]
    total = 0.0
    for i, j in ipairs:
        total += wmat[(i, j)]
    return Matching(tuple(pairs), total)


def check_matching(m: Matching, edges: Iterable[tuple]) -> None:
    """Raise AssertionError if ``m`` is not a valid matching over ``edges``."""
    present = {frozenset((a, b)) for a, b, _w in edges}
    seen = set()
    for a, b in m.pairs:
        assert frozenset((a, b)) in present, f"{a}-{b} is not an input edge"
        assert a not in seen and b not in seen, f"node reused in {a}-{b}"
        seen.add(a)
        seen.add(b)


def _blossom(nvertex: int, edges: list[tuple[int, int, float]]) -> list[int]:
    """Primal-dual blossom solver on integer-indexed vertices.

    Returns ``mate`` where ``mate[v]`` is the partner of v or -1.
    All edge weights are assumed positive.
    """
    nedge = len(edges)
    maxweight = max(w for _i, _j, w in edges)
    ev = [e[0] for e in edges]
    ew = [e[1] for e in edges]
    w2 = [2 * e[2] for e in edges]

    # endpoint p belongs to edge p//2; endpoint[p] is its vertex
    endpoint = [edges[p >> 1][p & 1] for p in range(2 * nedge)]
    neighbend: list[list[int]] = [[] for _ in range(nvertex)]
    for k, (i, j, _w) in enumerate(edges):
        neighbend[i].append(2 * k + 1)
        neighbend[j].append(2 * k)

    mate = [-1] * nvertex  # remote endpoint of matched edge, or -1
    # label: 0 free, 1 S, 2 T (top-level blossoms only)
    label = [0] * (2 * nvertex)
    labelend = [-1] * (2 * nvertex)
    inblossom = list(range(nvertex))
    blossomparent = [-1] * (2 * nvertex)
    blossomchilds: list = [None] * (2 * nvertex)
    blossombase = list(range(nvertex)) + [-1] * nvertex
    blossomendps: list = [None] * (2 * nvertex)
    bestedge = [-1] * (2 * nvertex)
    blossombestedges: list = [None] * (2 * nvertex)
    unusedblossoms = list(range(nvertex, 2 * nvertex))
    dualvar = [maxweight] * nvertex + [0] * nvertex
    allowedge = [False] * nedge
    queue: list[int] = []

    def slack(k):
        return dualvar[ev[k]] + dualvar[ew[k]] - w2[k]

    def leaves(b):
        if b < nvertex:
            yield b
        else:
            for t in blossomchilds[b]:
                if t < nvertex:
                    yield t
                else:
                    yield from leaves(t)

    def assign_label(w, t, p):
        b = inblossom[w]
        label[w] = label[b] = t
        labelend[w] = labelend[b] = p
        bestedge[w] = bestedge[b] = -1
        if t == 1:
            if b < nvertex:
                queue.append(b)
            else:
                queue.extend(leaves(b))
        else:
            base = blossombase[b]
            assign_label(endpoint[mate[base]], 1, mate[base] ^ 1)

    def scan_blossom(v, w):
        # trace back from v and w to find a common base or an augmenting path
        path = []
        base = -1
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            path.append(b)
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = endpoint[labelend[b]]
                b = inblossom[v]
                v = endpoint[labelend[b]]
            if w != -1:
                v, w = w, v
        for b in path:
            label[b] = 1
        return base

    def add_blossom(base, k):
        v, w, _wt = edges[k]
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = unusedblossoms.pop()
        blossombase[b] = base
        blossomparent[b] = -1
        blossomparent[bb] = b
        path = []
        endps = []
        while bv != bb:
            blossomparent[bv] = b
            path.append(bv)
            endps.append(labelend[bv])
            v = endpoint[labelend[bv]]
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            blossomparent[bw] = b
            path.append(bw)
            endps.append(labelend[bw] ^ 1)
            w = endpoint[labelend[bw]]
            bw = inblossom[w]
        blossomchilds[b] = path
        blossomendps[b] = endps
        label[b] = 1
        labelend[b] = labelend[bb]
        dualvar[b] = 0
        for x in leaves(b):
            if label[inblossom[x]] == 2:
                queue.append(x)
            inblossom[x] = b
        # merge least-slack edge lists of the sub-blossoms
        bestedgeto = [-1] * (2 * nvertex)
        for bv in path:
            if blossombestedges[bv] is None:
                nblists = [[p >> 1 for p in neighbend[x]] for x in leaves(bv)]
            else:
                nblists = [blossombestedges[bv]]
            for nblist in nblists:
                for kk in nblist:
                    i, j, _ = edges[kk]
                    if inblossom[j] == b:
                        i, j = j, i
                    bj = inblossom[j]
                    if (bj != b and label[bj] == 1
                            and (bestedgeto[bj] == -1 or slack(kk) < slack(bestedgeto[bj]))):
                        bestedgeto[bj] = kk
            blossombestedges[bv] = None
            bestedge[bv] = -1
        blossombestedges[b] = [kk for kk in bestedgeto if kk != -1]
        bestedge[b] = -1
        for kk in blossombestedges[b]:
            if bestedge[b] == -1 or slack(kk) < slack(bestedge[b]):
                bestedge[b] = kk

    def expand_blossom(b, endstage):
        for s in blossomchilds[b]:
            blossomparent[s] = -1
            if s < nvertex:
                inblossom[s] = s
            elif endstage and dualvar[s] == 0:
                expand_blossom(s, endstage)
            else:
                for x in leaves(s):
                    inblossom[x] = s
        if not endstage and label[b] == 2:
            # relabel the children along the even path through the T-blossom
            entrychild = inblossom[endpoint[labelend[b] ^ 1]]
            childs = blossomchilds[b]
            endps = blossomendps[b]
            j = childs.index(entrychild)
            if j & 1:
                j -= len(childs)
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                label[endpoint[endps[j - endptrick] ^ endptrick ^ 1]] = 0
                assign_label(endpoint[p ^ 1], 2, p)
                allowedge[endps[j - endptrick] >> 1] = True
                j += jstep
                p = endps[j - endptrick] ^ endptrick
                allowedge[p >> 1] = True
                j += jstep
            bv = childs[j]
            label[endpoint[p ^ 1]] = label[bv] = 2
            labelend[endpoint[p ^ 1]] = labelend[bv] = p
            bestedge[bv] = -1
            j += jstep
            while childs[j] != entrychild:
                bv = childs[j]
                if label[bv] == 1:
                    j += jstep
                    continue
                for v in leaves(bv):
                    if label[v] != 0:
                        break
                if label[v] != 0:
                    label[v] = 0
                    label[endpoint[mate[blossombase[bv]]]] = 0
                    assign_label(v, 2, labelend[v])
                j += jstep
        label[b] = labelend[b] = -1
        blossomchilds[b] = blossomendps[b] = None
        blossombase[b] = -1
        blossombestedges[b] = None
        bestedge[b] = -1
        unusedblossoms.append(b)

    def augment_blossom(b, v):
        t = v
        while blossomparent[t] != b:
            t = blossomparent[t]
        if t >= nvertex:
            augment_blossom(t, v)
        childs = blossomchilds[b]
        endps = blossomendps[b]
        i = j = childs.index(t)
        if i & 1:
            j -= len(childs)
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[j]
            p = endps[j - endptrick] ^ endptrick
            if t >= nvertex:
                augment_blossom(t, endpoint[p])
            j += jstep
            t = childs[j]
            if t >= nvertex:
                augment_blossom(t, endpoint[p ^ 1])
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        blossomchilds[b] = childs[i:] + childs[:i]
        blossomendps[b] = endps[i:] + endps[:i]
        blossombase[b] = blossombase[blossomchilds[b][0]]

    def augment_matching(k):
        v, w, _wt = edges[k]
        for s, p in ((v, 2 * k + 1), (w, 2 * k)):
            while True:
                bs = inblossom[s]
                if bs >= nvertex:
                    augment_blossom(bs, s)
                mate[s] = p
                if labelend[bs] == -1:
                    break
                t = endpoint[labelend[bs]]
                bt = inblossom[t]
                s = endpoint[labelend[bt]]
                j = endpoint[labelend[bt] ^ 1]
                if bt >= nvertex:
                    augment_blossom(bt, j)
                mate[j] = labelend[bt]
                p = labelend[bt] ^ 1

    for _stage in range(nvertex):
        label[:] = [0] * (2 * nvertex)
        bestedge[:] = [-1] * (2 * nvertex)
        blossombestedges[nvertex:] = [None] * nvertex
        allowedge[:] = [False] * nedge
        queue.clear()
        for v in range(nvertex):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, 1, -1)

        augmented = False
        while True:
            while queue and not augmented:
                v = queue.pop()
                for p in neighbend[v]:
                    k = p >> 1
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    if not allowedge[k]:
                        kslack = dualvar[ev[k]] + dualvar[ew[k]] - w2[k]
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            assign_label(w, 2, p ^ 1)
                        elif label[inblossom[w]] == 1:
                            base = scan_blossom(v, w)
                            if base >= 0:
                                add_blossom(base, k)
                            else:
                                augment_matching(k)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < (dualvar[ev[bestedge[b]]] + dualvar[ew[bestedge[b]]] - w2[bestedge[b]]):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < (dualvar[ev[bestedge[w]]] + dualvar[ew[bestedge[w]]] - w2[bestedge[w]]):
                            bestedge[w] = k
            if augmented:
                break

            # no augmenting path under current duals: pick the dual step
            deltatype = 1
            delta = min(dualvar[:nvertex])
            deltaedge = -1
            deltablossom = -1
            for v in range(nvertex):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = (dualvar[ev[bestedge[v]]] + dualvar[ew[bestedge[v]]] - w2[bestedge[v]])
                    if d < delta:
                        delta = d
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(2 * nvertex):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    d = (dualvar[ev[bestedge[b]]] + dualvar[ew[bestedge[b]]] - w2[bestedge[b]]) / 2
                    if d < delta:
                        delta = d
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(nvertex, 2 * nvertex):
                if (blossombase[b] >= 0 and blossomparent[b] == -1 and label[b] == 2
                        and dualvar[b] < delta):
                    delta = dualvar[b]
                    deltatype = 4
                    deltablossom = b

            for v in range(nvertex):
                lb = label[inblossom[v]]
                if lb == 1:
                    dualvar[v] -= delta
                elif lb == 2:
                    dualvar[v] += delta
            for b in range(nvertex, 2 * nvertex):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta

            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = True
                i, j, _ = edges[deltaedge]
                if label[inblossom[i]] == 0:
                    i, j = j, i
                queue.append(i)
            elif deltatype == 3:
                allowedge[deltaedge] = True
                i, j, _ = edges[deltaedge]
                queue.append(i)
            else:
                expand_blossom(deltablossom, False)

        if not augmented:
            break

        for b in range(nvertex, 2 * nvertex):
            if (blossomparent[b] == -1 and blossombase[b] >= 0
                    and label[b] == 1 and dualvar[b] == 0):
                expand_blossom(b, True)

    return [endpoint[p] if p != -1 else -1 for p in mate]


def _solver():
    """Compiled solver when built, else the pure-Python one.

    ``JCPD_PURE_PYTHON=1`` forces the Python path.
    """
    if _compiled is None or os.environ.get("JCPD_PURE_PYTHON") == "1":
        return _blossom
    return _compiled


try:
    from ._blossom_ext import blossom as _compiled
except ImportError:  # extension not built
    _compiled = None
