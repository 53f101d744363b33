import itertools

import pytest

from RelCert.coset_space import (CosetSpace, FoldedGraph, FoldingResolver, LatticeResolver, MembershipResolver,
                                 SubgroupSpec, TransversalResolver, Vertex, act, build_coset_space, rho, transporter,
                                 trivial_subgroup, vertices_within)
from RelCert.errors import CosetSearchExhaustedError, OutOfWindowError, SpecMismatchError
from RelCert.groups import ball, distance, element, identity, parse_group_spec, parse_word
from RelCert.services.configuration_manager import ConfigurationManager


class TestBuild:
    def test_trivial_family_gives_the_cayley_ball(self, z_trivial):
        assert len(z_trivial) == 13
        assert isinstance(z_trivial.resolver, TransversalResolver)
        assert not z_trivial.is_closed()

    def test_finite_quotient_is_closed(self, z_mod_2):
        assert isinstance(z_mod_2.resolver, LatticeResolver)
        assert [v.format(z_mod_2.ambient) for v in z_mod_2.vertices] == ["0:e", "0:x1"]
        assert z_mod_2.is_closed()

    def test_free_factors(self, f2, f2_factors):
        cs = build_coset_space(f2, f2_factors, 1)
        assert [v.format(f2) for v in cs.vertices] == ["0:e", "0:b", "0:b^-1", "1:e", "1:a", "1:a^-1"]
        assert len(build_coset_space(f2, f2_factors, 2)) == 18

    def test_two_finite_quotients(self, z):
        family = [SubgroupSpec.from_words(z, "H1", ["x1^2"]), SubgroupSpec.from_words(z, "H2", ["x1^3"])]
        cs = build_coset_space(z, family, 1)
        assert len(cs) == 5
        assert cs.is_closed()
        assert len(cs.component_vertices(1)) == 3

    def test_finite_index_in_free_group(self, f2):
        family = [SubgroupSpec.from_words(f2, "H", ["b", "a^2", "a*b*a^-1"])]
        cs = build_coset_space(f2, family, 1)
        assert len(cs) == 2
        assert isinstance(cs.resolver, FoldingResolver)
        assert cs.is_closed()

    def test_representatives_and_transporters(self, f2, f2_factors):
        cs = build_coset_space(f2, f2_factors, 2)
        assert cs.representatives == [Vertex(0, ()), Vertex(1, ())]
        for v in cs.vertices:
            assert act(cs, transporter(cs, v), Vertex(v.component, ())) == v
            assert len(cs.transporters[v].word) == len(v.key)

    def test_rejects_bad_arguments(self, f2, f2_factors):
        with pytest.raises(ValueError):
            build_coset_space(f2, f2_factors, 0)
        with pytest.raises(ValueError):
            build_coset_space(f2, [], 2)
        with pytest.raises(ValueError):
            build_coset_space(f2, f2_factors, 2, resolver="guess")

    def test_membership_search_needs_a_finite_subgroup(self):
        spec = parse_group_spec("cyclic-product(a:2,b:3)")
        with pytest.raises(CosetSearchExhaustedError):
            build_coset_space(spec, [SubgroupSpec.from_words(spec, "H", ["a*b"])], 2)

    def test_finite_subgroup_by_membership(self):
        spec = parse_group_spec("cyclic-product(a:2,b:3)")
        cs = build_coset_space(spec, [SubgroupSpec.from_words(spec, "H", ["b*a*b^-1"])], 2)
        assert isinstance(cs.resolver, MembershipResolver)
        assert act(cs, element(spec, "b*a*b^-1"), Vertex(0, ())) == Vertex(0, ())
        assert act(cs, element(spec, "a*b^-1"), Vertex(0, ())) == Vertex(0, parse_word("b^-1", spec))

    def test_layer_cap(self, z):
        ConfigurationManager.update_setting("search", "membership_layer_cap", 1)
        with pytest.raises(CosetSearchExhaustedError):
            build_coset_space(z, [SubgroupSpec.from_words(z, "2Z", ["x1^2"])], 2, resolver="membership")

    def test_subgroup_label_required(self):
        with pytest.raises(ValueError):
            SubgroupSpec("", ())


class TestAction:
    def test_stabilizer_of_representative(self, f2, f2_factors):
        cs = build_coset_space(f2, f2_factors, 2)
        assert act(cs, element(f2, "a^3"), Vertex(0, ())) == Vertex(0, ())
        assert act(cs, element(f2, "a"), Vertex(1, ())) == Vertex(1, parse_word("a", f2))

    def test_action_is_compatible_with_multiplication(self, f2, f2_factors):
        cs = build_coset_space(f2, f2_factors, 2)
        g, h = element(f2, "a b"), element(f2, "b^-1")
        for v in cs.component_vertices(0):
            assert act(cs, g * h, v) == act(cs, g, act(cs, h, v))

    def test_vertices_beyond_depth_come_on_demand(self, f2, f2_factors):
        cs = build_coset_space(f2, f2_factors, 1)
        v = act(cs, element(f2, "a b a"), Vertex(0, ()))
        assert v == Vertex(0, parse_word("a b", f2))
        assert v not in cs

    def test_on_demand_reach(self, z):
        cs = build_coset_space(z, [SubgroupSpec.from_words(z, "5Z", ["x1^5"])], 1, reach=1)
        with pytest.raises(OutOfWindowError):
            act(cs, element(z, "x1^2"), Vertex(0, ()))

    def test_finite_quotient_action(self, z_mod_2, z):
        v = act(z_mod_2, element(z, "x1^3"), Vertex(0, ()))
        assert v == Vertex(0, parse_word("x1", z))

    def test_spec_mismatch(self, z_mod_2, f2):
        with pytest.raises(SpecMismatchError):
            act(z_mod_2, identity(f2), Vertex(0, ()))

    def test_rho(self, f2, f2_factors):
        cs = build_coset_space(f2, f2_factors, 2)
        v = Vertex(1, parse_word("a", f2))
        assert rho(cs, identity(f2), v) == 1
        assert rho(cs, element(f2, "a"), v) == 0

    def test_vertices_within(self, f2, f2_factors):
        cs = build_coset_space(f2, f2_factors, 2)
        assert len(vertices_within(cs, identity(f2), 1)) == 6
        shifted = vertices_within(cs, element(f2, "b"), 1)
        assert Vertex(0, parse_word("b", f2)) in shifted
        assert all(rho(cs, element(f2, "b"), v) <= 1 for v in shifted)
        with pytest.raises(OutOfWindowError):
            vertices_within(cs, identity(f2), 3)


class TestResolvers:
    def test_folded_graph(self, f2):
        graph = FoldedGraph([parse_word("a^5 b", f2), parse_word("a^5", f2)])
        assert len(graph.distance) == 5
        assert graph.read(parse_word("b^-1 a^5", f2)) == (0, ())
        assert graph.read(parse_word("a^2 b", f2)) == (2, parse_word("b", f2))

    def test_folding_finds_cancelling_products(self, f2):
        cs = build_coset_space(f2, [SubgroupSpec.from_words(f2, "H", ["a^5*b", "a^5"])], 1)
        assert act(cs, element(f2, "b"), Vertex(0, ())) == Vertex(0, ())
        assert act(cs, element(f2, "a^-5 b a^5"), Vertex(0, ())) == Vertex(0, ())
        assert [v.format(f2) for v in cs.vertices] == ["0:e", "0:a", "0:a^-1"]

    def test_folding_agrees_with_the_transversal(self, f2, f2_factors):
        folding, transversal = FoldingResolver(f2, f2_factors), TransversalResolver(f2, f2_factors)
        for g in ball(f2, 3):
            for component in (0, 1):
                assert folding.canonical(component, g.word) == transversal.canonical(component, g.word)

    def test_lattice_agrees_with_the_transversal(self, z2):
        family = [SubgroupSpec.from_words(z2, "V", ["x1"]), trivial_subgroup()]
        lattice, transversal = LatticeResolver(z2, family), TransversalResolver(z2, family)
        for g in ball(z2, 3):
            for component in (0, 1):
                assert lattice.canonical(component, g.word) == transversal.canonical(component, g.word)

    def test_index_two_lattice(self, z2):
        cs = build_coset_space(z2, [SubgroupSpec.from_words(z2, "H", ["x1*x2", "x1*x2^-1"])], 2)
        assert [v.format(z2) for v in cs.vertices] == ["0:e", "0:x1"]
        assert cs.is_closed()
        assert cs.resolver.contains(0, parse_word("x1^3 x2", z2))
        assert not cs.resolver.contains(0, parse_word("x2^3", z2))

    def test_resolver_is_recorded(self, f2):
        cs = build_coset_space(f2, [SubgroupSpec.from_words(f2, "H", ["a^2"])], 2)
        assert cs.to_dict()["resolver"] == "folding"
        assert isinstance(CosetSpace.from_dict(cs.to_dict()).resolver, FoldingResolver)


class TestInvariants:
    def test_stabilizers_in_the_ball(self, f2, f2_factors):
        factors = build_coset_space(f2, f2_factors, 2)
        folded = build_coset_space(f2, [SubgroupSpec.from_words(f2, "H", ["a^5*b", "a^5"])], 2)
        for g in ball(f2, 2):
            letters = {index for index, _ in g.word}
            assert (act(factors, g, Vertex(0, ())) == Vertex(0, ())) == (letters <= {0})
            assert (act(factors, g, Vertex(1, ())) == Vertex(1, ())) == (letters <= {1})
            assert (act(folded, g, Vertex(0, ())) == Vertex(0, ())) == (letters <= {1})

    @pytest.mark.parametrize("generators", [[["a"], ["b"]], [["a^5*b", "a^5"]], [["b", "a^2", "a*b*a^-1"]]])
    def test_rho_is_lipschitz(self, f2, generators):
        family = [SubgroupSpec.from_words(f2, f"H{i + 1}", words) for i, words in enumerate(generators)]
        cs = build_coset_space(f2, family, 2)
        elements = ball(f2, 2)
        for v in cs.vertices:
            rhos = {g: rho(cs, g, v) for g in elements}
            for g, h in itertools.product(elements, repeat=2):
                assert abs(rhos[g] - rhos[h]) <= distance(g, h)


class TestSerialisation:
    def test_save_and_load(self, tmp_path, f2, f2_factors):
        cs = build_coset_space(f2, f2_factors, 2)
        path = tmp_path / "space.json"
        cs.save(path)
        loaded = CosetSpace.load(path)
        assert loaded.vertices == cs.vertices
        assert loaded.schreier_edges == cs.schreier_edges
        assert loaded.to_dict() == cs.to_dict()

    def test_missing_field(self, f2, f2_factors):
        data = build_coset_space(f2, f2_factors, 1).to_dict()
        del data["edges"]
        with pytest.raises(ValueError):
            CosetSpace.from_dict(data)

    def test_vertex_text(self, f2):
        assert Vertex.parse("1:a*b^-1", f2) == Vertex(1, parse_word("a b^-1", f2))
        assert Vertex(0, ()).format(f2) == "0:e"
