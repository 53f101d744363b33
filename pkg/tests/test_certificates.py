import random
from fractions import Fraction

import pytest

from RelCert.certificates import (CertParams, Certificate, Convention, IntegerCertificate, ProbCertificate,
                                  SetFamilyCertificate, as_prob, convert, from_dict, integer_to_prob, integer_to_sets,
                                  l1_distance, load_certificate, pair_variation, prob_to_integer, save_certificate,
                                  sets_to_integer, to_dict, verify, window_pairs)
from RelCert.coset_space import Vertex, act, build_coset_space
from RelCert.errors import CertificateFormatError, ConventionMismatchError, EmptySupportError, SpecMismatchError
from RelCert.groups import ball, element, identity


def point(cs, k):
    return act(cs, element(cs.ambient, f"x1^{k}"), Vertex(0, ()))


def interval_certificate(cs, n, window=2, convention=Convention.REITER):
    """Uniform weight on x, x+1, ..., x+n-1 (or on 0..n-1 at every x when identity-centered)."""
    entries = {}
    for x in ball(cs.ambient, window):
        start = x.length * (1 if x.word and x.word[0][1] > 0 else -1) if convention == Convention.REITER else 0
        entries[x] = {point(cs, start + i): 1 for i in range(n)}
    return IntegerCertificate(cs.ambient, entries, convention)


class TestForms:
    def test_set_family_needs_initial_segments(self, z_trivial):
        e = identity(z_trivial.ambient)
        v = Vertex(0, ())
        SetFamilyCertificate(z_trivial.ambient, {e: frozenset({(v, 1), (v, 2)})})
        with pytest.raises(CertificateFormatError):
            SetFamilyCertificate(z_trivial.ambient, {e: frozenset({(v, 2)})})
        with pytest.raises(EmptySupportError):
            SetFamilyCertificate(z_trivial.ambient, {e: frozenset()})

    def test_integer_values(self, z_trivial):
        e = identity(z_trivial.ambient)
        with pytest.raises(CertificateFormatError):
            IntegerCertificate(z_trivial.ambient, {e: {Vertex(0, ()): -1}})
        with pytest.raises(EmptySupportError):
            IntegerCertificate(z_trivial.ambient, {e: {Vertex(0, ()): 0}})

    def test_probability_mass(self, z_trivial):
        e = identity(z_trivial.ambient)
        with pytest.raises(CertificateFormatError):
            ProbCertificate(z_trivial.ambient, {e: {Vertex(0, ()): Fraction(1, 2)}})

    def test_conversions_preserve_the_distribution(self, z_trivial):
        c = interval_certificate(z_trivial, 3)
        sets = integer_to_sets(c)
        assert sets_to_integer(sets).entries == c.entries
        prob = as_prob(sets)
        assert all(value == Fraction(1, 3) for x in prob.entries for value in prob.entries[x].values())
        assert prob_to_integer(prob, 3).entries == c.entries
        assert convert(prob, "sets", M=3).entries == sets.entries

    def test_largest_remainder_rounding(self, z_trivial):
        e = identity(z_trivial.ambient)
        u, v = point(z_trivial, 0), point(z_trivial, 1)
        prob = ProbCertificate(z_trivial.ambient, {e: {u: Fraction(1, 2), v: Fraction(1, 2)}})
        assert prob_to_integer(prob, 3).entries[e] == {u: 2, v: 1}
        with pytest.raises(ValueError):
            prob_to_integer(prob, 0)

    def test_convert_errors(self, z_trivial):
        c = interval_certificate(z_trivial, 2)
        with pytest.raises(CertificateFormatError):
            convert(c, "matrix")
        with pytest.raises(ValueError):
            convert(as_prob(c), "integer")


def random_certificate(cs, rng, points, window=2):
    entries = {}
    for x in ball(cs.ambient, window):
        xi = {p: rng.randint(0, 3) for p in rng.sample(points, rng.randint(1, 5))}
        xi[rng.choice(points)] = rng.randint(1, 3)
        entries[x] = xi
    return IntegerCertificate(cs.ambient, entries)


def assert_forms_agree(c):
    sets = integer_to_sets(c)
    prob = integer_to_prob(c)
    assert sets_to_integer(sets).entries == c.entries
    for x in c.entries:
        for y in c.entries:
            xi, eta = c.distribution(x), c.distribution(y)
            assert len(sets.entries[x] ^ sets.entries[y]) == l1_distance(xi, eta)
            assert l1_distance(prob.entries[x], prob.entries[y]) <= 2 * l1_distance(xi, eta) / sum(xi.values())


class TestEquivalences:
    @pytest.mark.parametrize("seed", range(200))
    def test_random_line_certificates(self, z_trivial, seed):
        points = [point(z_trivial, k) for k in range(-3, 4)]
        assert_forms_agree(random_certificate(z_trivial, random.Random(seed), points))

    @pytest.mark.parametrize("seed", range(200))
    def test_random_free_group_certificates(self, f2, f2_factors, seed):
        cs = build_coset_space(f2, f2_factors, 2)
        assert_forms_agree(random_certificate(cs, random.Random(seed), cs.vertices))

    def test_certificate_is_abstract(self, z_trivial):
        with pytest.raises(TypeError):
            Certificate(z_trivial.ambient, {})


class TestParams:
    def test_decimal_epsilon_is_exact(self):
        assert CertParams(1, "0.6", 3, 2).epsilon == Fraction(3, 5)

    def test_invalid(self):
        with pytest.raises(ValueError):
            CertParams(2, "1/2", 3, 1)
        with pytest.raises(ValueError):
            CertParams(1, -1, 3, 2)
        with pytest.raises(ValueError):
            CertParams(0, "1/2", 3, 2)


class TestWindowPairs:
    def test_line(self, z):
        assert len(window_pairs(z, 2, 1)) == 8

    def test_free_group(self, f2):
        pairs = window_pairs(f2, 1, 1)
        assert len(pairs) == 8
        assert all(1 <= (x.inverse() * y).length <= 1 for x, y in pairs)

    def test_radius_is_inclusive(self, z):
        assert len(window_pairs(z, 2, 2)) == 14


class TestVerify:
    def test_interval_certificate_passes(self, z_trivial):
        c = interval_certificate(z_trivial, 3)
        report = verify(c, z_trivial, CertParams(1, "7/10", 3, 2))
        assert report.passed
        assert report.achieved_variation == Fraction(2, 3)
        assert report.pairs_checked == 8
        assert report.to_dict()["achieved_variation"] == "2/3"

    def test_variation_bound_is_strict(self, z_trivial):
        report = verify(interval_certificate(z_trivial, 3), z_trivial, CertParams(1, "2/3", 3, 2))
        assert report.support_ok
        assert not report.variation_ok
        assert report.variation_witness is not None

    def test_support_bound_is_strict(self, z_trivial):
        report = verify(interval_certificate(z_trivial, 3), z_trivial, CertParams(1, "7/10", 2, 2))
        assert not report.support_ok
        assert report.support_witness[2] == 2

    def test_forms_agree(self, z_trivial):
        c = interval_certificate(z_trivial, 3)
        params = CertParams(1, "7/10", 3, 2)
        for form in (c, integer_to_sets(c), as_prob(c)):
            assert verify(form, z_trivial, params).achieved_variation == Fraction(2, 3)

    def test_identity_centered(self, z_trivial):
        c = interval_certificate(z_trivial, 3, convention=Convention.IDENTITY)
        report = verify(c, z_trivial, CertParams(1, "7/10", 3, 2))
        assert report.passed
        assert report.convention == Convention.IDENTITY
        x, y = element(z_trivial.ambient, "x1"), element(z_trivial.ambient, "x1^2")
        assert pair_variation(c, z_trivial, x, y) == Fraction(2, 3)

    def test_convention_mismatch(self, z_trivial):
        c = interval_certificate(z_trivial, 3)
        with pytest.raises(ConventionMismatchError):
            verify(c, z_trivial, CertParams(1, "7/10", 3, 2), convention="identity-centered")

    def test_missing_window_entry(self, z_trivial):
        c = interval_certificate(z_trivial, 3, window=1)
        with pytest.raises(CertificateFormatError):
            verify(c, z_trivial, CertParams(1, "7/10", 3, 2))

    def test_spec_mismatch(self, z_trivial, f2, f2_factors):
        with pytest.raises(SpecMismatchError):
            verify(interval_certificate(z_trivial, 3), build_coset_space(f2, f2_factors, 2), CertParams(1, 1, 3, 2))


class TestDocuments:
    def test_save_and_load(self, tmp_path, z_trivial):
        c = as_prob(interval_certificate(z_trivial, 3))
        params = CertParams(1, "7/10", 3, 2)
        path = tmp_path / "cert.json"
        save_certificate(c, path, params)
        loaded, loaded_params = load_certificate(path)
        assert loaded.form == "prob"
        assert loaded.entries == c.entries
        assert loaded_params == params

    def test_document_layout(self, z_trivial):
        data = to_dict(interval_certificate(z_trivial, 2, window=0))
        assert data["form"] == "integer"
        assert data["points"] == "cosets"
        assert data["entries"] == {"e": [["0:e", "1"], ["0:x1", "1"]]}

    def test_missing_field(self, z_trivial):
        data = to_dict(interval_certificate(z_trivial, 2))
        del data["entries"]
        with pytest.raises(CertificateFormatError):
            from_dict(data)

    def test_integer_values_must_be_integers(self, z_trivial):
        data = to_dict(interval_certificate(z_trivial, 2, window=0))
        data["entries"]["e"][0][1] = "1/2"
        with pytest.raises(CertificateFormatError):
            from_dict(data)
