import itertools

import pytest

from opcat.finset import FinMap, identity as fidentity
from opcat.graphs import (
    GraphMorphism,
    OrderedGraph,
    blow_up_graphs,
    build_graph,
    canonical_class,
    canonical_key,
    contract,
    corolla,
    enumerate_graphs,
    factorize_RCL,
    fiber,
    from_json,
    gcompose,
    graph_identity,
    induced_fiber_map,
    inverse,
    isomorphisms,
    morphisms_between,
    morphisms_out,
    to_dot,
    to_json,
)


def two_loops(k=0):
    """One vertex, k legs then two loops."""
    return build_graph([k + 4], [(k + 1, k + 2), (k + 3, k + 4)])


def one_loop(k=0):
    return build_graph([k + 2], [(k + 1, k + 2)])


def path3():
    """a - b - c: three vertices, two edges, no legs."""
    return build_graph([1, 2, 1], [(1, 2), (3, 4)])


def test_identity_fibers_are_chosen_corollas():
    g = two_loops(2)
    idm = graph_identity(g)
    assert fiber(idm, 1) == corolla(6)
    h = path3()
    idm = graph_identity(h)
    for i in (1, 2, 3):
        assert fiber(idm, i) == corolla(h.valency(i))


def test_fiber_of_map_to_corolla_is_whole_graph():
    g = two_loops(1)
    # the unique map to the chosen corolla contracts both loops
    m = contract(g, FinMap(1, 1, [1]), {1: [(2, 3), (4, 5)]})
    assert m.dst == corolla(1)
    assert fiber(m, 1) == g


def test_two_loop_contraction_fiber_matches_figure():
    # contracting the first loop leaves the one-loop graph whose legs are
    # extended by the surviving loop's flags
    k = 2
    g = two_loops(k)
    p1 = contract(g, FinMap(1, 1, [1]), {1: [(k + 1, k + 2)]})
    assert p1.dst == one_loop(k)
    f = fiber(p1, 1)
    expected = build_graph([k + 4], [(k + 1, k + 2)])
    assert f == OrderedGraph(expected.pre, (1, 2, 5, 6))
    p2 = contract(g, FinMap(1, 1, [1]), {1: [(k + 3, k + 4)]})
    f2 = fiber(p2, 1)
    expected2 = build_graph([k + 4], [(k + 3, k + 4)])
    assert f2 == OrderedGraph(expected2.pre, (1, 2, 3, 4))


def test_contract_identity():
    g = path3()
    m = contract(g, fidentity(3), {})
    assert m.is_identity


def test_contract_path_to_corolla():
    g = path3()
    m = contract(g, FinMap(3, 1, [1, 1, 1]), {1: [(1, 2), (3, 4)]})
    assert m.dst == corolla(0)


def test_contract_rejects_crossing_edge():
    g = path3()
    with pytest.raises(ValueError):
        contract(g, FinMap(3, 2, [1, 1, 2]), {1: [(3, 4)]})


def test_morphism_validation_catches_bad_leg_order():
    g = corolla(2)
    with pytest.raises(ValueError):
        # swapping legs breaks global-order compatibility
        GraphMorphism(g, g, fidentity(1), FinMap(2, 2, [2, 1]))


def test_induced_fiber_map_round_trip():
    g = path3()
    f = contract(g, FinMap(3, 2, [1, 1, 2]), {1: [(1, 2)]})
    s = f.dst
    h = contract(s, FinMap(2, 1, [1, 1]), {1: [s.edges[0]]})
    fi = induced_fiber_map(f, h, 1)
    fi.validate()
    assert fi.src == fiber(gcompose(f, h), 1)
    assert fi.dst == fiber(h, 1)


def test_factorize_rcl_round_trip_exhaustive_small():
    g = path3()
    seen = 0
    for m in morphisms_out(g, reorder="all"):
        li, cont, reo = factorize_RCL(m)
        assert li.is_local_isomorphism
        assert cont.is_pure_contraction
        assert reo.is_local_reordering
        assert gcompose(gcompose(li, cont), reo) == m
        seen += 1
    assert seen > 0


def test_factorize_rcl_iso_has_identity_contraction():
    g = two_loops(1)
    for m in isomorphisms(g, g):
        li, cont, reo = factorize_RCL(m)
        assert cont.is_identity


def test_factorize_rcl_order_preserving_has_identity_li():
    g = path3()
    for m in morphisms_out(g, delta_only=True, reorder="all"):
        li, cont, reo = factorize_RCL(m)
        assert li.is_identity


def test_quasibijections_are_invertible():
    g = path3()
    count = 0
    for m in morphisms_out(g, reorder="all"):
        if m.is_quasibijection():
            inv = inverse(m)
            assert gcompose(m, inv).is_identity
            count += 1
    assert count >= 1


def test_blow_up_trivial_fiber_maps():
    g = path3()
    Φ = contract(g, FinMap(3, 2, [1, 1, 2]), {1: [(1, 2)]})
    Ξ = [graph_identity(fiber(Φ, i)) for i in (1, 2)]
    a, b = blow_up_graphs(Φ, Ξ)
    assert a.is_identity or a.is_isomorphism
    assert gcompose(a, b) == Φ
    for i in (1, 2):
        assert fiber(b, i) == Ξ[i - 1].dst


def test_blow_up_with_contraction_fiber_maps():
    g = path3()
    Φ = contract(g, FinMap(3, 1, [1, 1, 1]), {1: [(1, 2), (3, 4)]})
    fib = fiber(Φ, 1)  # the whole path
    inner = contract(fib, FinMap(3, 2, [1, 1, 2]), {1: [(1, 2)]})
    a, b = blow_up_graphs(Φ, [inner])
    assert gcompose(a, b) == Φ
    assert fiber(b, 1) == inner.dst
    assert induced_fiber_map(a, b, 1) == inner


def test_blow_up_uniqueness_by_search():
    g = path3()
    Φ = contract(g, FinMap(3, 1, [1, 1, 1]), {1: [(1, 2), (3, 4)]})
    fib = fiber(Φ, 1)
    inner = contract(fib, FinMap(3, 2, [1, 1, 2]), {1: [(1, 2)]})
    a0, b0 = blow_up_graphs(Φ, [inner])
    found = []
    for a in morphisms_out(g, reorder="all"):
        try:
            candidates = morphisms_between(a.dst, Φ.dst, reorder="all")
        except ValueError:
            continue
        for b in candidates:
            if not b.is_delta:
                continue
            if gcompose(a, b) != Φ:
                continue
            if all(
                induced_fiber_map(a, b, i) == [inner][i - 1]
                for i in range(1, Φ.dst.nvertices + 1)
            ):
                found.append((a, b))
    assert found == [(a0, b0)]


def test_enumerate_corollas_counts():
    got = list(enumerate_graphs(nlegs=3, max_vertices=1, max_edges=0,
                                leg_orders="all"))
    assert len(got) == 6  # one ordered corolla per global leg order
    got_canon = list(enumerate_graphs(nlegs=3, max_vertices=1, max_edges=0))
    assert len(got_canon) == 1


def test_enumerate_two_loop_family():
    got = list(
        enumerate_graphs(nlegs=1, max_vertices=1, exact_edges=2)
    )
    # one vertex, 5 flags, two loops: choose 4 flags and match them
    assert all(g.nflags == 5 and g.grade == 2 for g in got)
    keys = {canonical_class(g) for g in got}
    assert len(keys) == 1  # all are the xi(.|a,b|c,d) shape


def test_enumerate_connected_two_vertex_one_edge():
    got = [
        g
        for g in enumerate_graphs(
            nlegs=2, max_vertices=2, exact_edges=1, min_vertices=2
        )
        if g.is_connected()
    ]
    assert got
    assert len({canonical_class(g) for g in got}) > 0


def test_canonical_class_ignores_orders():
    c1 = corolla(3)
    c2 = corolla(3, sigma=[2, 3, 1])
    assert c1 != c2
    assert canonical_class(c1) == canonical_class(c2)
    # all corollas on n legs are isomorphic as ordered graphs, but global
    # order does separate e.g. differently-ordered two-vertex graphs
    assert canonical_key(c1) == canonical_key(c2)
    g1 = build_graph([2, 3], [(2, 3)], leg_order=(1, 4, 5))
    g2 = build_graph([2, 3], [(2, 3)], leg_order=(4, 1, 5))
    assert canonical_key(g1) != canonical_key(g2)
    assert canonical_class(g1) == canonical_class(g2)

    # two-loop graphs differing only in leg labels
    g1 = OrderedGraph(two_loops(2).pre, (1, 2))
    g2 = OrderedGraph(two_loops(2).pre, (2, 1))
    assert canonical_class(g1) == canonical_class(g2)

    # a path and a loop with equal leg counts have different keys
    p = build_graph([1, 1], [(1, 2)])
    l = one_loop(0)
    assert canonical_class(p) != canonical_class(l)


def test_canonical_class_respects_decorations():
    g = build_graph([1, 1], [(1, 2)])
    k1 = canonical_class(g, {"genus": (0, 1)})
    k2 = canonical_class(g, {"genus": (1, 0)})
    k3 = canonical_class(g, {"genus": (0, 0)})
    assert k1 == k2  # symmetric under the vertex swap
    assert k1 != k3


def test_json_round_trip():
    g = two_loops(2)
    s = to_json(g, {"genus": (1,)})
    g2, dec = from_json(s)
    assert g2 == g
    assert dec == {"genus": (1,)}
    assert to_json(g2, dec) == s


def test_dot_export_smoke():
    g = build_graph([2, 2], [(2, 3)])
    out = to_dot(g, {"orientation": (0, 1, 0, 1)})
    assert "v1 -- v2" in out
    assert out.count("leg") >= 2


def test_composite_of_pure_contractions_is_pure():
    g = path3()
    f = contract(g, FinMap(3, 2, [1, 1, 2]), {1: [(1, 2)]})
    s = f.dst
    h = contract(s, FinMap(2, 1, [1, 1]), {1: [s.edges[0]]})
    comp = gcompose(f, h)
    assert comp.is_pure_contraction


def test_grade_additivity_over_fibers():
    g = two_loops(1)
    for m in morphisms_out(g, reorder="canonical"):
        total = m.dst.grade + sum(
            fiber(m, i).grade for i in range(1, m.dst.nvertices + 1)
        )
        assert total == g.grade
