# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=False
"""Compiled twin of ``matching._blossom``.

Line-for-line the same algorithm and arithmetic order, so both paths give
identical matchings; the pure-Python version stays the reference.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef class _Solver:
    cdef int nvertex, nedge
    cdef int[:] ev, ew, endpoint, mate, label, labelend, inblossom
    cdef int[:] blossomparent, blossombase, bestedge, nb_start, nb_list
    cdef double[:] w2, dualvar
    cdef char[:] allowedge
    cdef list blossomchilds, blossomendps, blossombestedges, unusedblossoms, queue

    def __init__(self, int nvertex, list edges):
        cdef int k, i, j, n2 = 2 * nvertex
        cdef int nedge = len(edges)
        self.nvertex = nvertex
        self.nedge = nedge
        self.ev = np.empty(nedge, dtype=np.intc)
        self.ew = np.empty(nedge, dtype=np.intc)
        self.w2 = np.empty(nedge, dtype=np.float64)
        self.endpoint = np.empty(2 * nedge, dtype=np.intc)
        maxweight = None
        counts = np.zeros(nvertex + 1, dtype=np.intc)
        for k in range(nedge):
            i, j, w = edges[k]
            self.ev[k] = i
            self.ew[k] = j
            self.w2[k] = 2 * w
            self.endpoint[2 * k] = i
            self.endpoint[2 * k + 1] = j
            if maxweight is None or w > maxweight:
                maxweight = w
            counts[i + 1] += 1
            counts[j + 1] += 1
        # CSR adjacency of endpoints, edge order preserved per vertex
        self.nb_start = np.cumsum(counts).astype(np.intc)
        self.nb_list = np.empty(2 * nedge, dtype=np.intc)
        fill = np.array(self.nb_start[:nvertex], dtype=np.intc)
        for k in range(nedge):
            i = self.ev[k]
            j = self.ew[k]
            self.nb_list[fill[i]] = 2 * k + 1
            fill[i] += 1
            self.nb_list[fill[j]] = 2 * k
            fill[j] += 1

        self.mate = np.full(nvertex, -1, dtype=np.intc)
        self.label = np.zeros(n2, dtype=np.intc)
        self.labelend = np.full(n2, -1, dtype=np.intc)
        self.inblossom = np.arange(nvertex, dtype=np.intc)
        self.blossomparent = np.full(n2, -1, dtype=np.intc)
        self.blossomchilds = [None] * n2
        base = np.full(n2, -1, dtype=np.intc)
        base[:nvertex] = np.arange(nvertex, dtype=np.intc)
        self.blossombase = base
        self.blossomendps = [None] * n2
        self.bestedge = np.full(n2, -1, dtype=np.intc)
        self.blossombestedges = [None] * n2
        self.unusedblossoms = list(range(nvertex, n2))
        dv = np.zeros(n2, dtype=np.float64)
        dv[:nvertex] = maxweight
        self.dualvar = dv
        self.allowedge = np.zeros(nedge, dtype=np.int8)
        self.queue = []

    cdef inline double slack(self, int k):
        return self.dualvar[self.ev[k]] + self.dualvar[self.ew[k]] - self.w2[k]

    cdef list leaves(self, int b):
        cdef list out = []
        self._leaves(b, out)
        return out

    cdef void _leaves(self, int b, list out):
        cdef int t
        if b < self.nvertex:
            out.append(b)
        else:
            for t in self.blossomchilds[b]:
                if t < self.nvertex:
                    out.append(t)
                else:
                    self._leaves(t, out)

    cdef void assign_label(self, int w, int t, int p):
        cdef int b = self.inblossom[w]
        cdef int base
        self.label[w] = t
        self.label[b] = t
        self.labelend[w] = p
        self.labelend[b] = p
        self.bestedge[w] = -1
        self.bestedge[b] = -1
        if t == 1:
            if b < self.nvertex:
                self.queue.append(b)
            else:
                self.queue.extend(self.leaves(b))
        else:
            base = self.blossombase[b]
            self.assign_label(self.endpoint[self.mate[base]], 1, self.mate[base] ^ 1)

    cdef int scan_blossom(self, int v, int w):
        cdef list path = []
        cdef int base = -1, b, tmp
        while v != -1 or w != -1:
            b = self.inblossom[v]
            if self.label[b] & 4:
                base = self.blossombase[b]
                break
            path.append(b)
            self.label[b] = 5
            if self.labelend[b] == -1:
                v = -1
            else:
                v = self.endpoint[self.labelend[b]]
                b = self.inblossom[v]
                v = self.endpoint[self.labelend[b]]
            if w != -1:
                tmp = v
                v = w
                w = tmp
        for b in path:
            self.label[b] = 1
        return base

    cdef void add_blossom(self, int base, int k):
        cdef int v = self.ev[k], w = self.ew[k]
        cdef int bb = self.inblossom[base]
        cdef int bv = self.inblossom[v]
        cdef int bw = self.inblossom[w]
        cdef int b = self.unusedblossoms.pop()
        cdef int x, i, j, bj, kk, p
        cdef list path, endps, nblists, nblist, bestedgeto
        self.blossombase[b] = base
        self.blossomparent[b] = -1
        self.blossomparent[bb] = b
        path = []
        endps = []
        while bv != bb:
            self.blossomparent[bv] = b
            path.append(bv)
            endps.append(self.labelend[bv])
            v = self.endpoint[self.labelend[bv]]
            bv = self.inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            self.blossomparent[bw] = b
            path.append(bw)
            endps.append(self.labelend[bw] ^ 1)
            w = self.endpoint[self.labelend[bw]]
            bw = self.inblossom[w]
        self.blossomchilds[b] = path
        self.blossomendps[b] = endps
        self.label[b] = 1
        self.labelend[b] = self.labelend[bb]
        self.dualvar[b] = 0
        for x in self.leaves(b):
            if self.label[self.inblossom[x]] == 2:
                self.queue.append(x)
            self.inblossom[x] = b
        bestedgeto = [-1] * (2 * self.nvertex)
        for bv in path:
            if self.blossombestedges[bv] is None:
                nblists = []
                for x in self.leaves(bv):
                    nblists.append([self.nb_list[p] >> 1
                                    for p in range(self.nb_start[x], self.nb_start[x + 1])])
            else:
                nblists = [self.blossombestedges[bv]]
            for nblist in nblists:
                for kk in nblist:
                    i = self.ev[kk]
                    j = self.ew[kk]
                    if self.inblossom[j] == b:
                        i, j = j, i
                    bj = self.inblossom[j]
                    if (bj != b and self.label[bj] == 1
                            and (bestedgeto[bj] == -1 or self.slack(kk) < self.slack(bestedgeto[bj]))):
                        bestedgeto[bj] = kk
            self.blossombestedges[bv] = None
            self.bestedge[bv] = -1
        self.blossombestedges[b] = [kk for kk in bestedgeto if kk != -1]
        self.bestedge[b] = -1
        for kk in self.blossombestedges[b]:
            if self.bestedge[b] == -1 or self.slack(kk) < self.slack(self.bestedge[b]):
                self.bestedge[b] = kk

    cdef void expand_blossom(self, int b, bint endstage):
        cdef int s, x, j, jstep, endptrick, p, bv, v, entrychild
        cdef list childs, endps
        for s in self.blossomchilds[b]:
            self.blossomparent[s] = -1
            if s < self.nvertex:
                self.inblossom[s] = s
            elif endstage and self.dualvar[s] == 0:
                self.expand_blossom(s, endstage)
            else:
                for x in self.leaves(s):
                    self.inblossom[x] = s
        if not endstage and self.label[b] == 2:
            entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]]
            childs = self.blossomchilds[b]
            endps = self.blossomendps[b]
            j = childs.index(entrychild)
            if j & 1:
                j -= len(childs)
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = self.labelend[b]
            while j != 0:
                self.label[self.endpoint[p ^ 1]] = 0
                self.label[self.endpoint[<int>endps[_wrap(j - endptrick, len(endps))] ^ endptrick ^ 1]] = 0
                self.assign_label(self.endpoint[p ^ 1], 2, p)
                self.allowedge[(<int>endps[_wrap(j - endptrick, len(endps))]) >> 1] = 1
                j += jstep
                p = (<int>endps[_wrap(j - endptrick, len(endps))]) ^ endptrick
                self.allowedge[p >> 1] = 1
                j += jstep
            bv = childs[_wrap(j, len(childs))]
            self.label[self.endpoint[p ^ 1]] = 2
            self.label[bv] = 2
            self.labelend[self.endpoint[p ^ 1]] = p
            self.labelend[bv] = p
            self.bestedge[bv] = -1
            j += jstep
            while childs[_wrap(j, len(childs))] != entrychild:
                bv = childs[_wrap(j, len(childs))]
                if self.label[bv] == 1:
                    j += jstep
                    continue
                v = -1
                for v in self.leaves(bv):
                    if self.label[v] != 0:
                        break
                if self.label[v] != 0:
                    self.label[v] = 0
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0
                    self.assign_label(v, 2, self.labelend[v])
                j += jstep
        self.label[b] = -1
        self.labelend[b] = -1
        self.blossomchilds[b] = None
        self.blossomendps[b] = None
        self.blossombase[b] = -1
        self.blossombestedges[b] = None
        self.bestedge[b] = -1
        self.unusedblossoms.append(b)

    cdef void augment_blossom(self, int b, int v):
        cdef int t = v, i, j, jstep, endptrick, p, n
        cdef list childs, endps
        while self.blossomparent[t] != b:
            t = self.blossomparent[t]
        if t >= self.nvertex:
            self.augment_blossom(t, v)
        childs = self.blossomchilds[b]
        endps = self.blossomendps[b]
        n = len(childs)
        i = j = childs.index(t)
        if i & 1:
            j -= n
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[_wrap(j, n)]
            p = (<int>endps[_wrap(j - endptrick, n)]) ^ endptrick
            if t >= self.nvertex:
                self.augment_blossom(t, self.endpoint[p])
            j += jstep
            t = childs[_wrap(j, n)]
            if t >= self.nvertex:
                self.augment_blossom(t, self.endpoint[p ^ 1])
            self.mate[self.endpoint[p]] = p ^ 1
            self.mate[self.endpoint[p ^ 1]] = p
        self.blossomchilds[b] = childs[i:] + childs[:i]
        self.blossomendps[b] = endps[i:] + endps[:i]
        self.blossombase[b] = self.blossombase[<int>self.blossomchilds[b][0]]

    cdef void augment_matching(self, int k):
        cdef int s, p, bs, t, bt, j, side
        for side in range(2):
            if side == 0:
                s = self.ev[k]
                p = 2 * k + 1
            else:
                s = self.ew[k]
                p = 2 * k
            while True:
                bs = self.inblossom[s]
                if bs >= self.nvertex:
                    self.augment_blossom(bs, s)
                self.mate[s] = p
                if self.labelend[bs] == -1:
                    break
                t = self.endpoint[self.labelend[bs]]
                bt = self.inblossom[t]
                s = self.endpoint[self.labelend[bt]]
                j = self.endpoint[self.labelend[bt] ^ 1]
                if bt >= self.nvertex:
                    self.augment_blossom(bt, j)
                self.mate[j] = self.labelend[bt]
                p = self.labelend[bt] ^ 1

    cdef list solve(self):
        cdef int nvertex = self.nvertex
        cdef int stage, v, w, b, k, p, q, base, deltatype, deltaedge, deltablossom, lb, i, j, be
        cdef double delta, d, kslack
        cdef bint augmented
        for stage in range(nvertex):
            for i in range(2 * nvertex):
                self.label[i] = 0
                self.bestedge[i] = -1
            for i in range(nvertex, 2 * nvertex):
                self.blossombestedges[i] = None
            for i in range(self.nedge):
                self.allowedge[i] = 0
            del self.queue[:]
            for v in range(nvertex):
                if self.mate[v] == -1 and self.label[self.inblossom[v]] == 0:
                    self.assign_label(v, 1, -1)

            augmented = False
            while True:
                while self.queue and not augmented:
                    v = self.queue.pop()
                    for q in range(self.nb_start[v], self.nb_start[v + 1]):
                        p = self.nb_list[q]
                        k = p >> 1
                        w = self.endpoint[p]
                        if self.inblossom[v] == self.inblossom[w]:
                            continue
                        if not self.allowedge[k]:
                            kslack = self.slack(k)
                            if kslack <= 0:
                                self.allowedge[k] = 1
                        if self.allowedge[k]:
                            if self.label[self.inblossom[w]] == 0:
                                self.assign_label(w, 2, p ^ 1)
                            elif self.label[self.inblossom[w]] == 1:
                                base = self.scan_blossom(v, w)
                                if base >= 0:
                                    self.add_blossom(base, k)
                                else:
                                    self.augment_matching(k)
                                    augmented = True
                                    break
                            elif self.label[w] == 0:
                                self.label[w] = 2
                                self.labelend[w] = p ^ 1
                        elif self.label[self.inblossom[w]] == 1:
                            b = self.inblossom[v]
                            if self.bestedge[b] == -1 or kslack < self.slack(self.bestedge[b]):
                                self.bestedge[b] = k
                        elif self.label[w] == 0:
                            if self.bestedge[w] == -1 or kslack < self.slack(self.bestedge[w]):
                                self.bestedge[w] = k
                if augmented:
                    break

                deltatype = 1
                delta = self.dualvar[0]
                for v in range(1, nvertex):
                    if self.dualvar[v] < delta:
                        delta = self.dualvar[v]
                deltaedge = -1
                deltablossom = -1
                for v in range(nvertex):
                    be = self.bestedge[v]
                    if self.label[self.inblossom[v]] == 0 and be != -1:
                        d = self.slack(be)
                        if d < delta:
                            delta = d
                            deltatype = 2
                            deltaedge = be
                for b in range(2 * nvertex):
                    be = self.bestedge[b]
                    if self.blossomparent[b] == -1 and self.label[b] == 1 and be != -1:
                        d = self.slack(be) / 2
                        if d < delta:
                            delta = d
                            deltatype = 3
                            deltaedge = be
                for b in range(nvertex, 2 * nvertex):
                    if (self.blossombase[b] >= 0 and self.blossomparent[b] == -1 and self.label[b] == 2
                            and self.dualvar[b] < delta):
                        delta = self.dualvar[b]
                        deltatype = 4
                        deltablossom = b

                for v in range(nvertex):
                    lb = self.label[self.inblossom[v]]
                    if lb == 1:
                        self.dualvar[v] -= delta
                    elif lb == 2:
                        self.dualvar[v] += delta
                for b in range(nvertex, 2 * nvertex):
                    if self.blossombase[b] >= 0 and self.blossomparent[b] == -1:
                        if self.label[b] == 1:
                            self.dualvar[b] += delta
                        elif self.label[b] == 2:
                            self.dualvar[b] -= delta

                if deltatype == 1:
                    break
                elif deltatype == 2:
                    self.allowedge[deltaedge] = 1
                    i = self.ev[deltaedge]
                    j = self.ew[deltaedge]
                    if self.label[self.inblossom[i]] == 0:
                        i = j
                    self.queue.append(i)
                elif deltatype == 3:
                    self.allowedge[deltaedge] = 1
                    self.queue.append(self.ev[deltaedge])
                else:
                    self.expand_blossom(deltablossom, False)

            if not augmented:
                break

            for b in range(nvertex, 2 * nvertex):
                if (self.blossomparent[b] == -1 and self.blossombase[b] >= 0
                        and self.label[b] == 1 and self.dualvar[b] == 0):
                    self.expand_blossom(b, True)

        return [self.endpoint[self.mate[v]] if self.mate[v] != -1 else -1 for v in range(nvertex)]


cdef inline Py_ssize_t _wrap(Py_ssize_t j, Py_ssize_t n):
    # Python-style negative indexing for the cyclic child lists
    return j + n if j < 0 else j


def blossom(int nvertex, list edges):
    """Same contract as the pure-Python solver: returns ``mate``."""
    return _Solver(nvertex, edges).solve()
