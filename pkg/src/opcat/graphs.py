"""Preordered and ordered graphs with their full morphism calculus.

A preordered graph is an order-preserving attachment map from flags to
vertices plus an involution on flags; fixed points are legs, 2-cycles are
internal edges.  An ordered graph adds a global linear order of the legs,
i.e. a structure map to the corolla on that many legs.  Morphisms are pairs
(vertex surjection, contravariant flag injection) subject to the usual
square, equivariance, edge and leg-order conditions.

Flags are globally ordered lexicographically by (vertex, local position),
so the attachment map of every graph here is order-preserving by
construction and local orders are recovered as the induced orders on the
per-vertex flag intervals.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass

from .finset import FinMap, compose as fcompose, identity as fidentity


# ---------------------------------------------------------------------------
# graphs


class PreGraph:
    """An order-preserving flag-to-vertex map with a flag involution."""

    __slots__ = ("attach", "involution", "_hash")

    def __init__(self, attach: FinMap, involution):
        involution = tuple(involution)
        if not attach.is_order_preserving:
            raise ValueError("attachment map must be order-preserving")
        n = attach.dom.n
        if len(involution) != n:
            raise ValueError("involution length must equal the flag count")
        for h in range(1, n + 1):
            p = involution[h - 1]
            if not (1 <= p <= n) or involution[p - 1] != h:
                raise ValueError("involution must be self-inverse")
        object.__setattr__(self, "attach", attach)
        object.__setattr__(self, "involution", involution)
        object.__setattr__(self, "_hash", hash((attach, involution)))

    def __setattr__(self, *a):
        raise AttributeError("PreGraph is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, PreGraph)
            and self.attach == other.attach
            and self.involution == other.involution
        )

    def __hash__(self):
        return self._hash

    @property
    def nflags(self):
        return self.attach.dom.n

    @property
    def nvertices(self):
        return self.attach.cod.n

    def vertex_of(self, h):
        return self.attach(h)

    def flags_at(self, v):
        """Flags attached to vertex ``v``, in their (local) order."""
        return self.attach.preimage(v)

    @property
    def legs(self):
        ι = self.involution
        return tuple(h for h in range(1, self.nflags + 1) if ι[h - 1] == h)

    @property
    def edges(self):
        """Internal edges as ordered pairs ``(h1, h2)`` with ``h1 < h2``."""
        ι = self.involution
        return tuple(
            (h, ι[h - 1])
            for h in range(1, self.nflags + 1)
            if ι[h - 1] > h
        )

    def endpoints(self, edge):
        return (self.vertex_of(edge[0]), self.vertex_of(edge[1]))


class OrderedGraph:
    """A preordered graph together with a global order of its legs."""

    __slots__ = ("pre", "leg_order", "_hash")

    def __init__(self, pre: PreGraph, leg_order):
        leg_order = tuple(leg_order)
        if sorted(leg_order) != list(pre.legs):
            raise ValueError("leg order must be a bijection onto the legs")
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "leg_order", leg_order)
        object.__setattr__(self, "_hash", hash((pre, leg_order)))

    def __setattr__(self, *a):
        raise AttributeError("OrderedGraph is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, OrderedGraph)
            and self.pre == other.pre
            and self.leg_order == other.leg_order
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return (
            f"OrderedGraph(V={self.nvertices}, F={self.nflags}, "
            f"edges={list(self.edges)}, legs={list(self.leg_order)})"
        )

    # delegation

    @property
    def nflags(self):
        return self.pre.nflags

    @property
    def nvertices(self):
        return self.pre.nvertices

    @property
    def attach(self):
        return self.pre.attach

    @property
    def involution(self):
        return self.pre.involution

    @property
    def legs(self):
        return self.pre.legs

    @property
    def nlegs(self):
        return len(self.pre.legs)

    @property
    def edges(self):
        return self.pre.edges

    def flags_at(self, v):
        return self.pre.flags_at(v)

    def vertex_of(self, h):
        return self.pre.vertex_of(h)

    def endpoints(self, edge):
        return self.pre.endpoints(edge)

    @property
    def grade(self):
        """Number of internal edges."""
        return len(self.pre.edges)

    def valency(self, v):
        return len(self.pre.flags_at(v))

    def components(self):
        """Partition of vertices into connected components (sorted)."""
        parent = list(range(self.nvertices + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for h1, h2 in self.edges:
            a, b = find(self.vertex_of(h1)), find(self.vertex_of(h2))
            if a != b:
                parent[a] = b
        groups = {}
        for v in range(1, self.nvertices + 1):
            groups.setdefault(find(v), []).append(v)
        return sorted(tuple(g) for g in groups.values())

    def is_connected(self):
        return self.nvertices > 0 and len(self.components()) == 1

    def h1_dim(self):
        """dim H^1 of the realization: edges - vertices + components."""
        return len(self.edges) - self.nvertices + len(self.components())


def build_graph(flags_per_vertex, pairs, leg_order=None) -> OrderedGraph:
    """Assemble an ordered graph from per-vertex flag counts and edge pairs.

    Flags are numbered 1..F lexicographically; ``pairs`` lists the internal
    edges; ``leg_order`` defaults to the increasing order of the legs.
    """
    nflags = sum(flags_per_vertex)
    attach_vals = []
    for v, k in enumerate(flags_per_vertex, start=1):
        attach_vals.extend([v] * k)
    inv = list(range(1, nflags + 1))
    for h1, h2 in pairs:
        inv[h1 - 1] = h2
        inv[h2 - 1] = h1
    pre = PreGraph(FinMap(nflags, len(flags_per_vertex), attach_vals), inv)
    if leg_order is None:
        leg_order = pre.legs
    return OrderedGraph(pre, leg_order)


def corolla(n, sigma=None) -> OrderedGraph:
    """The one-vertex graph with ``n`` legs.

    ``sigma`` permutes the global order: the leg at local position ``i``
    gets global position ``sigma[i-1]``; identity gives the chosen corolla.
    """
    g = build_graph([n], [])
    if sigma is None:
        return g
    order = [0] * n
    for i, s in enumerate(sigma, start=1):
        order[s - 1] = i
    return OrderedGraph(g.pre, order)


# ---------------------------------------------------------------------------
# morphisms


class GraphMorphism:
    """A morphism of ordered graphs: vertex surjection + flag injection.

    ``vmap`` maps source vertices onto target vertices and ``fmap`` maps
    target flags injectively back into source flags.
    """

    __slots__ = ("src", "dst", "vmap", "fmap", "_hash")

    def __init__(self, src, dst, vmap: FinMap, fmap: FinMap, check=True):
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        object.__setattr__(self, "vmap", vmap)
        object.__setattr__(self, "fmap", fmap)
        object.__setattr__(self, "_hash", hash((src, dst, vmap, fmap)))
        if check:
            self.validate()

    def __setattr__(self, *a):
        raise AttributeError("GraphMorphism is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, GraphMorphism)
            and self.src == other.src
            and self.dst == other.dst
            and self.vmap == other.vmap
            and self.fmap == other.fmap
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"GraphMorphism(v={list(self.vmap.values)}, f={list(self.fmap.values)})"

    def validate(self):
        src, dst = self.src, self.dst
        if self.vmap.dom.n != src.nvertices or self.vmap.cod.n != dst.nvertices:
            raise ValueError("vertex map has wrong interface")
        if self.fmap.dom.n != dst.nflags or self.fmap.cod.n != src.nflags:
            raise ValueError("flag map has wrong interface")
        if not self.vmap.is_surjective:
            raise ValueError("vertex map must be surjective")
        if not self.fmap.is_injective:
            raise ValueError("flag map must be injective")
        ψ, φ = self.fmap, self.vmap
        for h in range(1, dst.nflags + 1):
            if φ(src.vertex_of(ψ(h))) != dst.vertex_of(h):
                raise ValueError("attachment square does not commute")
            if ψ(dst.involution[h - 1]) != src.involution[ψ(h) - 1]:
                raise ValueError("flag map must be equivariant")
        image = set(ψ.values)
        src_legs = set(src.legs)
        if {ψ(h) for h in dst.legs} != src_legs:
            raise ValueError("flag map must be a bijection on legs")
        for h1, h2 in src.edges:
            if φ(src.vertex_of(h1)) != φ(src.vertex_of(h2)):
                if h1 not in image or h2 not in image:
                    raise ValueError("separated edge not in the image")
        for j in range(len(dst.leg_order)):
            if ψ(dst.leg_order[j]) != src.leg_order[j]:
                raise ValueError("global leg orders not preserved")
        return self

    # structural predicates

    @property
    def is_identity(self):
        return self.src == self.dst and self.vmap.is_identity and self.fmap.is_identity

    @property
    def is_isomorphism(self):
        return self.vmap.is_bijective and self.fmap.is_bijective

    @property
    def is_delta(self):
        """Vertex map order-preserving (a morphism of ΔGr)."""
        return self.vmap.is_order_preserving

    @property
    def is_local_reordering(self):
        return self.vmap.is_identity and self.fmap.is_bijective

    @property
    def is_pure_contraction(self):
        return self.vmap.is_order_preserving and self.fmap.is_order_preserving

    @property
    def is_local_isomorphism(self):
        """Bijective on vertices, order-preserving on each local flag set."""
        if not (self.vmap.is_bijective and self.fmap.is_bijective):
            return False
        for i in range(1, self.dst.nvertices + 1):
            imgs = [self.fmap(h) for h in self.dst.flags_at(i)]
            if imgs != sorted(imgs):
                return False
        return True

    def is_quasibijection(self):
        """All fibers are chosen corollas."""
        if not (self.vmap.is_bijective and self.fmap.is_bijective):
            return False
        for i in range(1, self.dst.nvertices + 1):
            if fiber(self, i) != corolla(self.dst.valency(i)):
                return False
        return True


def graph_identity(g: OrderedGraph) -> GraphMorphism:
    return GraphMorphism(
        g, g, fidentity(g.nvertices), fidentity(g.nflags), check=False
    )


def gcompose(f: GraphMorphism, g: GraphMorphism) -> GraphMorphism:
    """The composite ``g∘f`` for ``f : A -> B`` and ``g : B -> C``."""
    if f.dst != g.src:
        raise ValueError("morphisms are not composable")
    return GraphMorphism(
        f.src,
        g.dst,
        fcompose(f.vmap, g.vmap),
        fcompose(g.fmap, f.fmap),
        check=False,
    )


def inverse(f: GraphMorphism) -> GraphMorphism:
    if not f.is_isomorphism:
        raise ValueError("morphism is not invertible")
    return GraphMorphism(f.dst, f.src, f.vmap.inverse(), f.fmap.inverse())


# ---------------------------------------------------------------------------
# fibers


def fiber_with_maps(Φ: GraphMorphism, i: int):
    """Fiber of ``Φ`` over target vertex ``i`` plus back-maps into the source.

    Returns ``(fiber, vback, fback)`` where ``vback``/``fback`` list, per
    fiber vertex/flag, the corresponding source vertex/flag label.
    """
    src, dst = Φ.src, Φ.dst
    block = Φ.vmap.preimage(i)
    vpos = {v: k for k, v in enumerate(block, start=1)}
    flags = [h for v in block for h in src.flags_at(v)]
    flags.sort()
    fpos = {h: k for k, h in enumerate(flags, start=1)}
    attach_vals = [vpos[src.vertex_of(h)] for h in flags]
    image = set(Φ.fmap.values)
    inv = []
    for h in flags:
        if h in image:
            inv.append(fpos[h])
        else:
            inv.append(fpos[src.involution[h - 1]])
    pre = PreGraph(FinMap(len(flags), len(block), attach_vals), inv)
    leg_order = [fpos[Φ.fmap(h)] for h in dst.flags_at(i)]
    return OrderedGraph(pre, leg_order), tuple(block), tuple(flags)


def fiber(Φ: GraphMorphism, i: int) -> OrderedGraph:
    return fiber_with_maps(Φ, i)[0]


def induced_fiber_map(f: GraphMorphism, g: GraphMorphism, i: int) -> GraphMorphism:
    """For composable ``f : T -> S``, ``g : S -> R``: the induced map
    ``f_i : (g∘f)^{-1}(i) -> g^{-1}(i)``."""
    h = gcompose(f, g)
    fib_h, vback_h, fback_h = fiber_with_maps(h, i)
    fib_g, vback_g, fback_g = fiber_with_maps(g, i)
    vpos_g = {v: k for k, v in enumerate(vback_g, start=1)}
    fpos_h = {x: k for k, x in enumerate(fback_h, start=1)}
    vvals = [vpos_g[f.vmap(v)] for v in vback_h]
    fvals = [fpos_h[f.fmap(x)] for x in fback_g]
    return GraphMorphism(
        fib_h,
        fib_g,
        FinMap(fib_h.nvertices, fib_g.nvertices, vvals),
        FinMap(fib_g.nflags, fib_h.nflags, fvals),
    )


# ---------------------------------------------------------------------------
# contractions and general morphism enumeration


def contract(Γ: OrderedGraph, vmap: FinMap, edge_sets) -> GraphMorphism:
    """The unique pure contraction with the given vertex blocks and edges.

    ``vmap`` must be an order-preserving surjection; ``edge_sets`` maps a
    target vertex to the edges (of ``Γ``) contracted inside its block.
    """
    if not (vmap.is_order_preserving and vmap.is_surjective):
        raise ValueError("vertex map must be an order-preserving surjection")
    if vmap.dom.n != Γ.nvertices:
        raise ValueError("vertex map domain mismatch")
    contracted = set()
    for i, edges in edge_sets.items():
        for h1, h2 in edges:
            v1, v2 = Γ.vertex_of(h1), Γ.vertex_of(h2)
            if vmap(v1) != i or vmap(v2) != i:
                raise ValueError("contracted edge crosses blocks")
            contracted.update((h1, h2))
    survivors = [h for h in range(1, Γ.nflags + 1) if h not in contracted]
    new_of = {h: k for k, h in enumerate(survivors, start=1)}
    attach_vals = [vmap(Γ.vertex_of(h)) for h in survivors]
    inv = [new_of[Γ.involution[h - 1]] for h in survivors]
    pre = PreGraph(FinMap(len(survivors), vmap.cod.n, attach_vals), inv)
    leg_order = [new_of[l] for l in Γ.leg_order]
    target = OrderedGraph(pre, leg_order)
    return GraphMorphism(
        Γ,
        target,
        vmap,
        FinMap(len(survivors), Γ.nflags, survivors),
    )


def _orderings(seq, mode, keep=None):
    """Orderings of ``seq`` according to an enumeration mode."""
    seq = list(seq)
    if mode == "canonical" or len(seq) <= 1:
        yield tuple(seq)
        return
    if mode == "transpositions":
        yield tuple(seq)
        for i in range(len(seq) - 1):
            s = list(seq)
            s[i], s[i + 1] = s[i + 1], s[i]
            yield tuple(s)
        return
    if isinstance(mode, int):
        if len(seq) > mode:
            yield tuple(seq)
            for i in range(len(seq) - 1):
                s = list(seq)
                s[i], s[i + 1] = s[i + 1], s[i]
                yield tuple(s)
            return
        mode = "all"
    if mode == "all":
        yield from itertools.permutations(seq)
        return
    raise ValueError(f"unknown ordering mode {mode!r}")


def morphisms_out(Γ: OrderedGraph, delta_only=False, reorder="all"):
    """All morphisms with source ``Γ``.

    A morphism is determined by a vertex surjection, a choice of contracted
    edges inside each block, and the local orders of surviving flags at the
    target vertices.  ``reorder`` limits the last freedom: ``"all"``,
    ``"canonical"``, ``"transpositions"``, or an int cap on block size
    above which only transpositions are used.
    """
    from .finset import all_order_surjections, all_surjections

    V = Γ.nvertices
    edges = Γ.edges
    for m in range(1, V + 1):
        vmaps = (
            all_order_surjections(V, m) if delta_only else all_surjections(V, m)
        )
        for vmap in vmaps:
            blocks = [vmap.preimage(i) for i in range(1, m + 1)]
            internal = []
            for bi in blocks:
                bset = set(bi)
                internal.append(
                    [
                        e
                        for e in edges
                        if Γ.vertex_of(e[0]) in bset and Γ.vertex_of(e[1]) in bset
                    ]
                )
            for contracted_choice in itertools.product(
                *(_subsets(es) for es in internal)
            ):
                contracted = {h for es in contracted_choice for e in es for h in e}
                surv_at = []
                for bi in blocks:
                    bset = set(bi)
                    surv_at.append(
                        [
                            h
                            for h in range(1, Γ.nflags + 1)
                            if Γ.vertex_of(h) in bset and h not in contracted
                        ]
                    )
                for orders in itertools.product(
                    *(_orderings(s, reorder) for s in surv_at)
                ):
                    flat = [h for block in orders for h in block]
                    attach_vals = [
                        i for i, block in enumerate(orders, start=1) for _ in block
                    ]
                    pos = {h: k for k, h in enumerate(flat, start=1)}
                    inv = [pos[Γ.involution[h - 1]] for h in flat]
                    try:
                        pre = PreGraph(
                            FinMap(len(flat), m, attach_vals), inv
                        )
                        leg_order = [pos[l] for l in Γ.leg_order]
                        target = OrderedGraph(pre, leg_order)
                        yield GraphMorphism(
                            Γ, target, vmap, FinMap(len(flat), Γ.nflags, flat)
                        )
                    except ValueError:
                        continue


def _subsets(seq):
    for r in range(len(seq) + 1):
        yield from itertools.combinations(seq, r)


def morphisms_between(src: OrderedGraph, dst: OrderedGraph, reorder="all"):
    """All morphisms ``src -> dst`` (filtered from :func:`morphisms_out`)."""
    return [f for f in morphisms_out(src, reorder=reorder) if f.dst == dst]


def isomorphisms(src: OrderedGraph, dst: OrderedGraph):
    """All isomorphisms ``src -> dst`` by direct bijection search."""
    if (
        src.nvertices != dst.nvertices
        or src.nflags != dst.nflags
        or src.nlegs != dst.nlegs
    ):
        return
    n = src.nvertices
    sig_src = [_vertex_signature(src, v) for v in range(1, n + 1)]
    sig_dst = [_vertex_signature(dst, v) for v in range(1, n + 1)]
    candidates = [
        [u for u in range(1, n + 1) if sig_dst[u - 1] == sig_src[v - 1]]
        for v in range(1, n + 1)
    ]
    for vperm in itertools.product(*candidates):
        if len(set(vperm)) != n:
            continue
        vmap = FinMap(n, n, vperm)
        # flag assignment per dst vertex: map dst flags back into src flags
        per_vertex = []
        ok = True
        for u in range(1, n + 1):
            v = vperm.index(u) + 1  # src vertex mapping onto u
            sf, df = src.flags_at(v), dst.flags_at(u)
            if len(sf) != len(df):
                ok = False
                break
            per_vertex.append((u, df, sf))
        if not ok:
            continue
        slots = [list(itertools.permutations(sf)) for _, df, sf in per_vertex]
        for choice in itertools.product(*slots):
            fvals = [0] * dst.nflags
            for (u, df, sf), perm in zip(per_vertex, choice):
                for h, img in zip(df, perm):
                    fvals[h - 1] = img
            try:
                yield GraphMorphism(
                    src, dst, vmap, FinMap(dst.nflags, src.nflags, fvals)
                )
            except ValueError:
                continue


def _vertex_signature(g, v):
    flags = g.flags_at(v)
    loops = sum(
        1 for h in flags if g.involution[h - 1] != h and g.vertex_of(g.involution[h - 1]) == v
    )
    legs = sum(1 for h in flags if g.involution[h - 1] == h)
    return (len(flags), loops // 2, legs)


# ---------------------------------------------------------------------------
# factorization and blow-up


def factorize_RCL(Φ: GraphMorphism):
    """Factor ``Φ`` as local isomorphism, pure contraction, local reordering.

    Returns ``(li, cont, reo)`` with ``Φ = reo ∘ cont ∘ li``.
    """
    src = Φ.src
    order = sorted(range(1, src.nvertices + 1), key=lambda v: (Φ.vmap(v), v))
    π_vals = [0] * src.nvertices
    for k, v in enumerate(order, start=1):
        π_vals[v - 1] = k
    π = FinMap(src.nvertices, src.nvertices, π_vals)
    flags = sorted(range(1, src.nflags + 1), key=lambda h: (π(src.vertex_of(h)), h))
    η = {h: k for k, h in enumerate(flags, start=1)}
    attach_vals = [π(src.vertex_of(h)) for h in flags]
    inv = [η[src.involution[h - 1]] for h in flags]
    mid_pre = PreGraph(FinMap(len(flags), src.nvertices, attach_vals), inv)
    mid = OrderedGraph(mid_pre, [η[l] for l in src.leg_order])
    li = GraphMorphism(
        src, mid, π, FinMap(src.nflags, src.nflags, flags)
    )

    ξ_vals = [0] * src.nvertices
    for v in range(1, src.nvertices + 1):
        ξ_vals[π(v) - 1] = Φ.vmap(v)
    ξ = FinMap(src.nvertices, Φ.vmap.cod, ξ_vals)
    image = set(Φ.fmap.values)
    edge_sets = {}
    for h1, h2 in src.edges:
        if h1 not in image:
            i = Φ.vmap(src.vertex_of(h1))
            edge_sets.setdefault(i, []).append((η[h1], η[h2]))
    cont = contract(mid, ξ, edge_sets)

    u = cont.dst
    pos_u = {cont.fmap(k): k for k in range(1, u.nflags + 1)}
    fvals = [pos_u[η[Φ.fmap(h)]] for h in range(1, Φ.dst.nflags + 1)]
    reo = GraphMorphism(
        u, Φ.dst, fidentity(u.nvertices), FinMap(Φ.dst.nflags, u.nflags, fvals)
    )
    return li, cont, reo


def blow_up_graphs(Φ: GraphMorphism, fiber_maps):
    """Factor an order-preserving ``Φ`` through prescribed fiber maps.

    Given morphisms ``Ξ_i`` out of the fibers of ``Φ``, returns the unique
    ``(a, b)`` with ``Φ = b ∘ a``, ``b`` order-preserving with fibers the
    targets of the ``Ξ_i``, and ``a`` inducing exactly the ``Ξ_i``.
    """
    if not Φ.is_delta:
        raise ValueError("blow-up input must be order-preserving on vertices")
    dst = Φ.dst
    m = dst.nvertices
    if len(fiber_maps) != m:
        raise ValueError("need one fiber map per target vertex")
    lambdas = []
    fibers = []
    for i in range(1, m + 1):
        fib, vback, fback = fiber_with_maps(Φ, i)
        Ξ = fiber_maps[i - 1]
        if Ξ.src != fib:
            raise ValueError(f"fiber map {i} has wrong source")
        lambdas.append(Ξ.dst)
        fibers.append((fib, vback, fback))

    voffset = [0]
    foffset = [0]
    for lam in lambdas:
        voffset.append(voffset[-1] + lam.nvertices)
        foffset.append(foffset[-1] + lam.nflags)
    nV, nF = voffset[-1], foffset[-1]
    attach_vals = []
    for i, lam in enumerate(lambdas):
        for h in range(1, lam.nflags + 1):
            attach_vals.append(voffset[i] + lam.vertex_of(h))
    # involution: within-block edges from the Λ_i, the rest via the flags of
    # the base graph (legs of the Λ_i correspond to the base local orders)
    psi_b = [0] * dst.nflags
    for i in range(1, m + 1):
        lam = lambdas[i - 1]
        local = dst.flags_at(i)
        if len(local) != lam.nlegs:
            raise ValueError(f"fiber map {i} target has wrong leg count")
        for pos, h in enumerate(local):
            psi_b[h - 1] = foffset[i - 1] + lam.leg_order[pos]
    inv = list(range(1, nF + 1))
    for i, lam in enumerate(lambdas):
        for h1, h2 in lam.edges:
            inv[foffset[i] + h1 - 1] = foffset[i] + h2
            inv[foffset[i] + h2 - 1] = foffset[i] + h1
    for h1, h2 in dst.edges:
        inv[psi_b[h1 - 1] - 1] = psi_b[h2 - 1]
        inv[psi_b[h2 - 1] - 1] = psi_b[h1 - 1]
    pre = PreGraph(FinMap(nF, nV, attach_vals), inv)
    leg_order = [psi_b[l - 1] for l in dst.leg_order]
    mid = OrderedGraph(pre, leg_order)

    b_vmap = FinMap(
        nV, m, [i for i in range(1, m + 1) for _ in range(lambdas[i - 1].nvertices)]
    )
    b = GraphMorphism(mid, dst, b_vmap, FinMap(dst.nflags, nF, psi_b))

    a_vvals = [0] * Φ.src.nvertices
    a_fvals = [0] * nF
    for i in range(1, m + 1):
        Ξ = fiber_maps[i - 1]
        fib, vback, fback = fibers[i - 1]
        for k, v in enumerate(vback, start=1):
            a_vvals[v - 1] = voffset[i - 1] + Ξ.vmap(k)
        for h in range(1, Ξ.dst.nflags + 1):
            a_fvals[foffset[i - 1] + h - 1] = fback[Ξ.fmap(h) - 1]
    a = GraphMorphism(
        Φ.src,
        mid,
        FinMap(Φ.src.nvertices, nV, a_vvals),
        FinMap(nF, Φ.src.nflags, a_fvals),
    )
    if gcompose(a, b) != Φ:
        raise ValueError("blow-up construction failed to recompose")
    return a, b


# ---------------------------------------------------------------------------
# enumeration and canonical forms


def _matchings(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        remaining = rest[:k] + rest[k + 1 :]
        for sub in _matchings(remaining):
            yield [(first, partner)] + sub


def enumerate_graphs(
    nlegs=None,
    max_vertices=1,
    max_edges=0,
    exact_edges=None,
    max_legs=None,
    predicate=None,
    leg_orders="canonical",
    min_vertices=1,
):
    """All ordered graphs within the bounds, one per labelled form.

    With ``leg_orders="canonical"`` only the identity global order is
    produced; ``"all"`` yields every global order.  Isomorphism-class
    deduplication is done by the caller via :func:`canonical_key`.
    """
    edge_range = (
        [exact_edges] if exact_edges is not None else range(0, max_edges + 1)
    )
    leg_range = [nlegs] if nlegs is not None else range(0, (max_legs or 0) + 1)
    for m in range(min_vertices, max_vertices + 1):
        for e in edge_range:
            for L in leg_range:
                nflags = 2 * e + L
                for comp in _compositions(nflags, m):
                    attach_vals = []
                    for v, k in enumerate(comp, start=1):
                        attach_vals.extend([v] * k)
                    attach = FinMap(nflags, m, attach_vals)
                    for flagset in itertools.combinations(range(1, nflags + 1), 2 * e):
                        for matching in _matchings(flagset):
                            inv = list(range(1, nflags + 1))
                            for h1, h2 in matching:
                                inv[h1 - 1] = h2
                                inv[h2 - 1] = h1
                            pre = PreGraph(attach, inv)
                            legs = pre.legs
                            orders = (
                                [legs]
                                if leg_orders == "canonical"
                                else itertools.permutations(legs)
                            )
                            for order in orders:
                                g = OrderedGraph(pre, order)
                                if predicate is None or predicate(g):
                                    yield g


def _compositions(total, parts):
    """Weak compositions of ``total`` into ``parts`` parts."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _canonical_search(g: OrderedGraph, decorations=None, keep_global=False):
    """Lexicographically minimal serialization over graph isomorphisms.

    ``keep_global`` keeps the global leg positions in the serialization
    (isomorphism of ordered graphs); without it the global order is
    forgotten (virtual-isomorphism class).
    """
    n = g.nvertices
    genus = None
    orient = None
    if decorations:
        genus = decorations.get("genus")
        orient = decorations.get("orientation")
    sigs = []
    for v in range(1, n + 1):
        flags = g.flags_at(v)
        base = _vertex_signature(g, v)
        dec = genus[v - 1] if genus else 0
        ob = (
            tuple(sorted(orient[h - 1] for h in flags)) if orient else ()
        )
        sigs.append(base + (dec, ob))
    order_groups = {}
    for v in range(1, n + 1):
        order_groups.setdefault(sigs[v - 1], []).append(v)
    group_keys = sorted(order_groups)
    leg_pos = {h: k for k, h in enumerate(g.leg_order, start=1)}

    best = None
    for assignment in itertools.product(
        *(itertools.permutations(order_groups[k]) for k in group_keys)
    ):
        vseq = [v for group in assignment for v in group]
        flag_slots = [list(itertools.permutations(g.flags_at(v))) for v in vseq]
        for flag_choice in itertools.product(*flag_slots):
            new_label = {}
            counter = 1
            for perm in flag_choice:
                for h in perm:
                    new_label[h] = counter
                    counter += 1
            valencies = tuple(len(p) for p in flag_choice)
            inv_ser = tuple(
                new_label[g.involution[h - 1]]
                for perm in flag_choice
                for h in perm
            )
            parts = [valencies, inv_ser]
            if keep_global:
                parts.append(
                    tuple(
                        leg_pos.get(h, 0) for perm in flag_choice for h in perm
                    )
                )
            if genus:
                parts.append(tuple(genus[v - 1] for v in vseq))
            if orient:
                parts.append(
                    tuple(orient[h - 1] for perm in flag_choice for h in perm)
                )
            ser = tuple(parts)
            if best is None or ser < best:
                best = ser
    return best


@functools.lru_cache(maxsize=65536)
def _canonical_class_cached(g, decorations_items, keep_global):
    decorations = dict(decorations_items) if decorations_items else None
    return _canonical_search(g, decorations, keep_global)


def canonical_class(g: OrderedGraph, decorations=None):
    """A key equal for two graphs iff they are isomorphic after forgetting
    the global leg order (their virtual-isomorphism class)."""
    items = tuple(sorted(decorations.items())) if decorations else None
    return _canonical_class_cached(g, items, False)


def canonical_key(g: OrderedGraph, decorations=None):
    """Isomorphism-class key of an ordered graph (global legs kept)."""
    items = tuple(sorted(decorations.items())) if decorations else None
    return _canonical_class_cached(g, items, True)


# ---------------------------------------------------------------------------
# serialization


def to_json_dict(g: OrderedGraph, decorations=None):
    d = {
        "schema": "opcat/1",
        "flags": g.nflags,
        "vertices": g.nvertices,
        "attach": list(g.attach.values),
        "involution": list(g.involution),
        "leg_order": list(g.leg_order),
    }
    if decorations:
        d["decorations"] = {
            k: list(v) if isinstance(v, (tuple, list)) else v
            for k, v in decorations.items()
        }
    return d


def from_json_dict(d):
    pre = PreGraph(
        FinMap(d["flags"], d["vertices"], d["attach"]), d["involution"]
    )
    g = OrderedGraph(pre, d["leg_order"])
    decorations = d.get("decorations")
    if decorations is not None:
        decorations = {
            k: tuple(v) if isinstance(v, list) else v
            for k, v in decorations.items()
        }
    return g, decorations


def to_json(g: OrderedGraph, decorations=None):
    return json.dumps(to_json_dict(g, decorations), sort_keys=True)


def from_json(s):
    return from_json_dict(json.loads(s))


def to_dot(g: OrderedGraph, decorations=None, name="G"):
    """DOT rendering: legs as half-edges into point nodes, edges labelled
    by their flag pairs."""
    genus = (decorations or {}).get("genus")
    orient = (decorations or {}).get("orientation")
    lines = [f"graph {name} {{"]
    for v in range(1, g.nvertices + 1):
        label = f"v{v}" + (f" g={genus[v - 1]}" if genus else "")
        lines.append(f'  v{v} [label="{label}"];')
    for h1, h2 in g.edges:
        v1, v2 = g.vertex_of(h1), g.vertex_of(h2)
        attrs = [f'label="{h1}-{h2}"']
        if orient:
            # draw from the output half towards the input half
            if orient[h1 - 1] == 1 and orient[h2 - 1] == 0:
                attrs.append("dir=forward")
            elif orient[h2 - 1] == 1 and orient[h1 - 1] == 0:
                v1, v2, h1, h2 = v2, v1, h2, h1
                attrs.append("dir=forward")
        lines.append(f"  v{v1} -- v{v2} [{', '.join(attrs)}];")
    for j, h in enumerate(g.leg_order, start=1):
        v = g.vertex_of(h)
        lines.append(f'  leg{j} [shape=point, label=""];')
        lines.append(f'  v{v} -- leg{j} [style=dashed, label="{j}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
