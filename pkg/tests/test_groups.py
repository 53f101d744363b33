import pytest

from RelCert.errors import (GroupSpecSyntaxError, NonConfluentSystemError, NonReducingRuleError, ResourceLimitError,
                            SpecMismatchError, UnsupportedGroupKindError)
from RelCert.groups import (ball, distance, element, format_word, identity, invert_word, normal_form,
                            parse_group_spec, parse_word, shortlex_key, sphere_letters)
from RelCert.services.configuration_manager import ConfigurationManager

Z2_REWRITING = "rewriting(a,b | b*a->a*b, b*a^-1->a^-1*b, b^-1*a->a*b^-1, b^-1*a^-1->a^-1*b^-1) confluent"


class TestParseGroupSpec:
    def test_free_group(self):
        spec = parse_group_spec("free(a,b)")
        assert spec.kind == "free"
        assert spec.rank == 2
        assert [g.symbol for g in spec.generators] == ["a", "b"]

    def test_abelian_group_names_its_generators(self):
        spec = parse_group_spec("abelian(2)")
        assert spec.kind == "abelian"
        assert [g.symbol for g in spec.generators] == ["x1", "x2"]

    def test_syntax_error_reports_offset(self):
        with pytest.raises(GroupSpecSyntaxError) as info:
            parse_group_spec("free(a,")
        assert info.value.position == 7

    def test_unknown_kind(self):
        with pytest.raises(UnsupportedGroupKindError):
            parse_group_spec("braid(3)")

    def test_cyclic_product_orders(self):
        spec = parse_group_spec("cyclic-product(a:2,b:3)")
        assert spec.params == (2, 3)
        assert spec.text == "cyclic-product(a:2,b:3)"

    def test_product_of_free_and_abelian(self):
        spec = parse_group_spec("product(free(a,b);abelian(1))")
        assert spec.kind == "product"
        assert [g.symbol for g in spec.generators] == ["a", "b", "x1"]

    def test_non_reducing_rule_needs_confluence_flag(self):
        with pytest.raises(NonReducingRuleError):
            parse_group_spec("rewriting(a,b | b*a->a*b)")
        spec = parse_group_spec(Z2_REWRITING)
        assert spec.confluent

    def test_unresolved_critical_pair_is_rejected(self):
        # a^3 a^-1 rewrites to a^-1 by the rule and to a^2 by cancellation
        with pytest.raises(NonConfluentSystemError):
            parse_group_spec("rewriting(a | a^3->e)")
        with pytest.raises(NonConfluentSystemError):
            parse_group_spec("rewriting(a,b | b*a->a*b) confluent")

    def test_duplicate_symbols_rejected(self):
        with pytest.raises(GroupSpecSyntaxError):
            parse_group_spec("free(a,a)")

    def test_identity_symbol_is_reserved(self):
        with pytest.raises(GroupSpecSyntaxError):
            parse_group_spec("free(e,b)")


class TestNormalForm:
    def test_free_reduction(self, f2):
        g = normal_form(parse_word("a b b^-1 a", f2), f2)
        assert format_word(g.word, f2) == "a^2"
        assert g.length == 2

    def test_abelian_commutes(self, z2):
        g = normal_form(parse_word("x1 x2 x1^-1", z2), z2)
        assert format_word(g.word, z2) == "x2"
        assert g.length == 1

    def test_cyclic_relators(self):
        spec = parse_group_spec("cyclic-product(a:2,b:3)")
        g = normal_form(parse_word("a a b", spec), spec)
        assert format_word(g.word, spec) == "b"

    def test_order_three_prefers_short_exponent(self):
        spec = parse_group_spec("cyclic-product(a:2,b:3)")
        assert format_word(element(spec, "b^2").word, spec) == "b^-1"

    def test_rewriting_system(self):
        spec = parse_group_spec("rewriting(a | a^2->a^-1, a^-2->a)")
        assert element(spec, "a^4") == element(spec, "a")
        assert len(ball(spec, 2)) == 3

    def test_commuting_rewriting_system(self):
        spec = parse_group_spec(Z2_REWRITING)
        assert format_word(element(spec, "b a^-1 b a").word, spec) == "b^2"
        assert format_word(element(spec, "b^-1 a b^-1 a").word, spec) == "a^2*b^-2"
        assert len(ball(spec, 2)) == 13

    def test_idempotent_and_multiplicative(self, f2):
        elements = ball(f2, 3)
        for g in elements:
            assert normal_form(g.word, f2) == g
        for g in elements[:20]:
            for h in elements[:20]:
                assert g * h == normal_form(g.word + h.word, f2)

    def test_rewriting_cap(self):
        spec = parse_group_spec(Z2_REWRITING)
        ConfigurationManager.update_setting("search", "max_cells", 3)
        with pytest.raises(ResourceLimitError):
            element(spec, "b b b a a a")

    def test_word_syntax(self, f2):
        assert parse_word("e", f2) == ()
        assert parse_word("1", f2) == ()
        assert parse_word("a*b^-2", f2) == ((0, 1), (1, -1), (1, -1))
        with pytest.raises(ValueError):
            parse_word("c", f2)

    def test_letter_order(self):
        assert shortlex_key(((0, 1),)) < shortlex_key(((0, -1),)) < shortlex_key(((1, 1),))
        assert invert_word(((0, 1), (1, -1))) == ((1, 1), (0, -1))


class TestDistance:
    def test_identity(self, f2):
        assert distance(identity(f2), identity(f2)) == 0

    def test_free(self, f2):
        assert distance(element(f2, "a"), element(f2, "a b")) == 1

    def test_abelian(self, z2):
        assert distance(identity(z2), element(z2, "x1^2 x2^3")) == 5

    def test_spec_mismatch(self, f2, z2):
        with pytest.raises(SpecMismatchError):
            distance(identity(f2), identity(z2))

    def test_left_invariant_metric(self, z2):
        elements = ball(z2, 2)
        for g in elements:
            for h in elements:
                assert distance(g, h) == distance(h, g)
                for k in elements[:5]:
                    assert distance(k * g, k * h) == distance(g, h)
                    assert distance(g, h) <= distance(g, k) + distance(k, h)


class TestBall:
    def test_free_radius_one(self, f2):
        assert [str(g) for g in ball(f2, 1)] == ["e", "a", "a^-1", "b", "b^-1"]

    def test_sizes(self, f2, z2):
        assert len(ball(f2, 2)) == 17
        assert len(ball(z2, 2)) == 13

    def test_nested_and_deterministic(self, f2):
        assert set(ball(f2, 2)) <= set(ball(f2, 3))
        assert ball(f2, 3) == ball(f2, 3)

    def test_cap(self, f2):
        with pytest.raises(ResourceLimitError):
            ball(f2, 3, cap=20)

    def test_negative_radius(self, f2):
        with pytest.raises(ValueError):
            ball(f2, -1)

    def test_sphere_letters(self, f2):
        assert [str(s) for s in sphere_letters(f2)] == ["a", "a^-1", "b", "b^-1"]
