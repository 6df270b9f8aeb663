"""The skeletal category of finite ordinals.

Objects are the ordinals ``{1, ..., n}`` (including the empty one), maps are
stored as value tuples.  Fibers come back as ordinal-plus-embedding pairs so
that they are again objects of the category; this makes the cardinality
compatibility ``|f^{-1}(i)| = |f|^{-1}(i)`` a typed equality everywhere else
in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


@dataclass(frozen=True)
class Ordinal:
    """The linearly ordered set ``{1, ..., n}``."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("ordinal size must be nonnegative")

    def __iter__(self):
        return iter(range(1, self.n + 1))

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Ordinal({self.n})"


class FinMap:
    """A map between finite ordinals, stored as its tuple of values.

    ``values[i-1]`` is the image of ``i``; every entry lies in ``1..cod``.
    Instances are immutable and hashable.
    """

    __slots__ = ("dom", "cod", "values", "_hash")

    def __init__(self, dom, cod, values):
        dom = dom if isinstance(dom, Ordinal) else Ordinal(dom)
        cod = cod if isinstance(cod, Ordinal) else Ordinal(cod)
        values = tuple(values)
        if len(values) != dom.n:
            raise ValueError("length of values must equal the domain size")
        for v in values:
            if not (1 <= v <= cod.n):
                raise ValueError(f"value {v} outside 1..{cod.n}")
        object.__setattr__(self, "dom", dom)
        object.__setattr__(self, "cod", cod)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_hash", hash((dom.n, cod.n, values)))

    def __setattr__(self, *a):
        raise AttributeError("FinMap is immutable")

    def __call__(self, i):
        return self.values[i - 1]

    def __eq__(self, other):
        return (
            isinstance(other, FinMap)
            and self.dom.n == other.dom.n
            and self.cod.n == other.cod.n
            and self.values == other.values
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"FinMap({self.dom.n}->{self.cod.n}, {list(self.values)})"

    # cached structural flags

    @property
    def is_surjective(self):
        return len(set(self.values)) == self.cod.n

    @property
    def is_injective(self):
        return len(set(self.values)) == self.dom.n

    @property
    def is_bijective(self):
        return self.dom.n == self.cod.n and self.is_surjective

    @property
    def is_order_preserving(self):
        return all(a <= b for a, b in zip(self.values, self.values[1:]))

    @property
    def is_identity(self):
        return self.dom.n == self.cod.n and self.values == tuple(
            range(1, self.dom.n + 1)
        )

    def preimage(self, i):
        """Positions ``j`` with ``f(j) = i``, in increasing order."""
        return tuple(j for j in range(1, self.dom.n + 1) if self.values[j - 1] == i)

    def inverse(self):
        if not self.is_bijective:
            raise ValueError("only bijections invert")
        inv = [0] * self.dom.n
        for j, v in enumerate(self.values, start=1):
            inv[v - 1] = j
        return FinMap(self.cod, self.dom, inv)


def identity(n) -> FinMap:
    n = n.n if isinstance(n, Ordinal) else n
    return FinMap(n, n, range(1, n + 1))


def compose(f: FinMap, g: FinMap) -> FinMap:
    """The composite ``g∘f``, defined when ``f.cod = g.dom``."""
    if f.cod.n != g.dom.n:
        raise ValueError(
            f"cannot compose: codomain {f.cod.n} != domain {g.dom.n}"
        )
    return FinMap(f.dom, g.cod, tuple(g.values[v - 1] for v in f.values))


def fiber(f: FinMap, i: int):
    """The fiber of ``f`` over ``i`` as ``(Ordinal, embedding)``.

    The embedding is the order-preserving injection of the fiber into the
    domain; its image is exactly the preimage of ``i``.
    """
    if not (1 <= i <= f.cod.n):
        raise ValueError(f"index {i} outside 1..{f.cod.n}")
    pre = f.preimage(i)
    return Ordinal(len(pre)), FinMap(len(pre), f.dom, pre)


def induced_fiber_map(f: FinMap, g: FinMap, h: FinMap, i: int) -> FinMap:
    """The map ``f_i : h^{-1}(i) -> g^{-1}(i)`` of a commuting triangle.

    Here ``f : T -> S``, ``g : S -> R`` and ``h : T -> R`` with ``h = g∘f``;
    the triangle is verified.  The returned map commutes with the two fiber
    embeddings.
    """
    if compose(f, g) != h:
        raise ValueError("triangle does not commute: h != g∘f")
    if not (1 <= i <= g.cod.n):
        raise ValueError(f"index {i} outside 1..{g.cod.n}")
    nh, emb_h = fiber(h, i)
    ng, emb_g = fiber(g, i)
    pos_in_g = {v: k for k, v in enumerate(emb_g.values, start=1)}
    values = tuple(pos_in_g[f(emb_h(j))] for j in range(1, nh.n + 1))
    return FinMap(nh, ng, values)


def all_maps(dom: int, cod: int):
    """All maps ``dom -> cod`` (empty map included when ``dom = 0``)."""
    if dom == 0:
        yield FinMap(0, cod, ())
        return
    if cod == 0:
        return
    for values in itertools.product(range(1, cod + 1), repeat=dom):
        yield FinMap(dom, cod, values)


def all_surjections(dom: int, cod: int):
    for f in all_maps(dom, cod):
        if f.is_surjective:
            yield f


def all_bijections(n: int):
    for values in itertools.permutations(range(1, n + 1)):
        yield FinMap(n, n, values)


def all_order_surjections(dom: int, cod: int):
    """Order-preserving surjections ``dom -> cod``."""
    if cod == 0:
        if dom == 0:
            yield FinMap(0, 0, ())
        return
    if dom < cod:
        return
    # choose the cod-1 ascent positions among dom-1 gaps
    for cuts in itertools.combinations(range(1, dom), cod - 1):
        values = []
        block = 1
        for j in range(1, dom + 1):
            values.append(block)
            if block <= cod - 1 and j == cuts[block - 1]:
                block += 1
        yield FinMap(dom, cod, values)
