import math

import numpy as np
import pytest

from renyilp.algebra import AlgebraElement, PositiveFunctional, mpower, schatten_norm, support
from renyilp.ensembles import (make_rng, random_element, random_hermitian, random_state,
                               random_unitary)
from renyilp.errors import (ExponentMismatch, InvalidEta, InvalidExponent, NotHermitian,
                            NotInSpace, OutOfStrip, ZeroElement)
from renyilp.lp_kosaki import (KosakiElement, clarkson_sides, constant_path, duality_map_T,
                               embed_ip, extract, interpolation_path, is_member,
                               jordan_decompose, kosaki_norm, linf_norm, linf_norm_pair,
                               pairing, pixu_sides, reiterated_path, three_lines_check)

from oracles import fpow, schatten

PS = [1.0, 1.5, 2.0, 3.0, math.inf]


def sigma_diag(*v):
    return PositiveFunctional.from_array(np.diag(v))


def test_commuting_norm_example():
    # classical weighted norm (sum h_i^p s_i^(1-p))^(1/p) = 2/sqrt(3)
    h = AlgebraElement.diag([0.5, 0.5])
    assert kosaki_norm(h, sigma_diag(0.25, 0.75), 2) == pytest.approx(2 / math.sqrt(3), abs=1e-12)


@pytest.mark.parametrize("p", PS)
def test_reference_density_has_unit_norm(p, rng):
    s = random_state(rng, (3, 2))
    assert kosaki_norm(s.element, s, p) == pytest.approx(1.0, abs=1e-9)


def test_outside_support_is_infinite():
    h = AlgebraElement.diag([0.0, 1.0])
    assert kosaki_norm(h, sigma_diag(1.0, 0.0), 2) == math.inf
    assert not is_member(h, sigma_diag(1.0, 0.0))
    with pytest.raises(NotInSpace):
        KosakiElement(h, sigma_diag(1.0, 0.0), 2)


@pytest.mark.parametrize("p", PS)
def test_isometry_against_svd(p, rng):
    for _ in range(10):
        s = random_state(rng, (4,))
        k = random_element(rng, (4,))
        assert embed_ip(k, s, p).norm() == pytest.approx(schatten(k.blocks[0], p), abs=1e-9)


def test_embedding_of_sigma_power(rng):
    s = random_state(rng, (3,))
    for p in (1.5, 2.0, 4.0):
        assert embed_ip(mpower(s.element, 1 / p), s, p).h.allclose(s.element, atol=1e-12)


def test_extract_roundtrip(rng):
    s = random_state(rng, (3, 2), rank=2)
    e = support(s.element).projector
    h = e @ random_element(rng, (3, 2)) @ e
    for p in (1.0, 2.0, 3.0, math.inf):
        assert embed_ip(extract(h, s, p), s, p).h.allclose(h, atol=1e-9)
    assert extract(AlgebraElement.zeros((3, 2)), s, 2).allclose(AlgebraElement.zeros((3, 2)))


def test_extract_of_reference(rng):
    s = random_state(rng, (3,))
    assert extract(s.element, s, 3.0).allclose(mpower(s.element, 1 / 3), atol=1e-10)


def test_p_one_ignores_weight(rng):
    h = random_element(rng, (3,))
    s = random_state(rng, (3,))
    assert kosaki_norm(h, s, 1) == pytest.approx(schatten_norm(h, 1), rel=1e-12)


def test_norm_monotone_in_p(rng):
    for _ in range(20):
        s = random_state(rng, (3,))
        h = embed_ip(random_element(rng, (3,)), s, 1).h
        vals = [kosaki_norm(h, s, p) for p in PS]
        assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))


def test_invalid_exponent(rng):
    with pytest.raises(InvalidExponent):
        kosaki_norm(AlgebraElement.identity((2,)), sigma_diag(0.5, 0.5), 0.5)


def test_linf_examples(rng):
    s = random_state(rng, (3,))
    assert linf_norm(s.element, s) == pytest.approx(1.0, abs=1e-9)
    u = random_unitary(rng, 3)
    root = mpower(s.element, 0.5)
    x = AlgebraElement.from_array(u)
    # h_x = sigma^{1/2} x sigma^{1/2}; its L_inf norm is the operator norm of x
    assert linf_norm(root @ x @ root, s) == pytest.approx(1.0, abs=1e-8)
    assert linf_norm(root @ (x * 0.3) @ root, s) == pytest.approx(0.3, abs=1e-8)
    assert linf_norm(AlgebraElement.diag([0.0, 1.0]), sigma_diag(1.0, 0.0)) is None


def test_linf_pencil_and_direct_agree():
    rng = make_rng(11)
    for _ in range(200):
        d = int(rng.integers(2, 5))
        s = random_state(rng, (d,))
        k = random_element(rng, (d,))
        pencil, direct = linf_norm_pair(k, s)
        assert pencil == pytest.approx(direct, rel=1e-8, abs=1e-8)


def test_pairing_examples(rng):
    s = random_state(rng, (3,))
    assert pairing(KosakiElement(s.element, s, 2.0), KosakiElement(s.element, s, 2.0)) \
        == pytest.approx(1.0, abs=1e-10)
    x = random_element(rng, (3,))
    root = mpower(s.element, 0.5)
    psi = random_state(rng, (3,))
    hx = KosakiElement(root @ x @ root, s, math.inf)
    # pairing of h_x with h_psi is psi(x)
    assert pairing(hx, KosakiElement(psi.element, s, 1.0)) == pytest.approx(psi(x), abs=1e-9)
    with pytest.raises(ExponentMismatch):
        pairing(KosakiElement(s.element, s, 2.0), KosakiElement(s.element, s, 3.0))


def test_holder(rng):
    for _ in range(20):
        s = random_state(rng, (3,))
        h = embed_ip(random_element(rng, (3,)), s, 3.0)
        k = embed_ip(random_element(rng, (3,)), s, 1.5)
        assert abs(pairing(k, h)) <= k.norm() * h.norm() + 1e-9


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_duality_map_postconditions(p, rng):
    for _ in range(10):
        s = random_state(rng, (3, 2))
        h = embed_ip(random_element(rng, (3, 2)), s, p)
        t = duality_map_T(h)
        assert t.p == pytest.approx(p / (p - 1))
        assert t.norm() == pytest.approx(1.0, abs=1e-8)
        assert pairing(t, h) == pytest.approx(h.norm(), abs=1e-8)
        unit = h * (1 / h.norm())
        assert duality_map_T(duality_map_T(unit)).h.allclose(unit.h, atol=1e-8)


def test_duality_map_of_reference(rng):
    s = random_state(rng, (3,))
    assert duality_map_T(KosakiElement(s.element, s, 2.5)).h.allclose(s.element, atol=1e-10)


def test_duality_map_errors(rng):
    s = random_state(rng, (2,))
    with pytest.raises(ZeroElement):
        duality_map_T(KosakiElement(AlgebraElement.zeros((2,)), s, 2.0))
    with pytest.raises(InvalidExponent):
        duality_map_T(KosakiElement(s.element, s, 1.0))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_jordan(p, rng):
    for _ in range(10):
        s = random_state(rng, (3,))
        h = embed_ip(random_hermitian(rng, (3,)), s, p)
        plus, minus = jordan_decompose(h)
        assert (plus.h - minus.h).allclose(h.h, atol=1e-10)
        assert h.norm() ** p == pytest.approx(plus.norm() ** p + minus.norm() ** p, abs=1e-8)
        assert (plus.witness() @ minus.witness()).max_abs() < 1e-9


def test_jordan_edge_cases(rng):
    s = random_state(rng, (3,))
    plus, minus = jordan_decompose(KosakiElement(s.element, s, 2.0))
    assert minus.h.max_abs() < 1e-12
    with pytest.raises(NotHermitian):
        jordan_decompose(KosakiElement(random_element(rng, (3,)), s, 2.0))


def test_order_dominance(rng):
    for _ in range(20):
        s = random_state(rng, (3,))
        h = random_state(rng, (3,)).element
        h1 = h * 0.5
        for p in (1.5, 2.0, 4.0):
            assert kosaki_norm(h1, s, p) <= kosaki_norm(h, s, p) + 1e-9


def test_path_hits_base_point(rng):
    s = random_state(rng, (3,))
    for p in (1.5, 2.0, 3.0):
        h = embed_ip(random_element(rng, (3,)), s, p)
        assert interpolation_path(h)(1 / p).allclose(h.h, atol=1e-10)


def test_path_of_reference_is_constant(rng):
    s = random_state(rng, (3,))
    f = interpolation_path(KosakiElement(s.element, s, 2.0))
    for z in (0.0, 0.3 + 1j, 1.0 - 2j):
        assert f(z).allclose(s.element, atol=1e-10)


def test_path_constant_norm_on_grid(rng):
    s = random_state(rng, (3,))
    h = embed_ip(random_element(rng, (3,)), s, 2.5)
    f = interpolation_path(h)
    ref = h.norm()
    for x in np.linspace(0, 1, 5):
        for t in np.linspace(-2, 2, 5):
            assert f.norm_at(complex(x, t)) == pytest.approx(ref, abs=1e-7)


def test_path_errors(rng):
    s = random_state(rng, (2,))
    h = KosakiElement(s.element, s, 2.0)
    with pytest.raises(OutOfStrip):
        interpolation_path(h)(1.5)
    with pytest.raises(ZeroElement):
        interpolation_path(KosakiElement(AlgebraElement.zeros((2,)), s, 2.0))


def test_duality_of_path_pointwise(rng):
    s = random_state(rng, (3,))
    h = embed_ip(random_element(rng, (3,)), s, 3.0)
    h = h * (1 / h.norm())
    g = interpolation_path(duality_map_T(h))
    f = interpolation_path(h)
    for x in (0.2, 0.4, 0.6, 0.8):
        lhs = duality_map_T(KosakiElement(f(x), s, 1 / x)).h
        assert lhs.allclose(g(1 - x), atol=1e-7)


def test_three_lines_on_constant_path(rng):
    # recovers the monotonicity bound of the weighted norms in p
    psi, s = random_state(rng, (3,)), random_state(rng, (3,))
    f = constant_path(psi.element, s, p=4.0, p_prime=1.0)
    for eta in (0.25, 0.5, 0.75):
        bound, value = three_lines_check(f, eta)
        assert value <= bound + 1e-7


def test_three_lines_equality_on_norm_attaining_path(rng):
    s = random_state(rng, (3,))
    h = embed_ip(random_element(rng, (3,)), s, 2.0)
    f = reiterated_path(h, 3.0, 1.5)
    eta = 0.5
    bound, value = three_lines_check(f, eta)
    assert value == pytest.approx(bound, abs=1e-7)


def test_three_lines_reference(rng):
    s = random_state(rng, (3,))
    bound, value = three_lines_check(interpolation_path(KosakiElement(s.element, s, 2.0)), 0.5)
    assert bound == pytest.approx(1.0, abs=1e-9) and value == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(InvalidEta):
        three_lines_check(constant_path(s.element, s), 1.0)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, math.inf])
def test_clarkson_random(p, rng):
    for _ in range(10):
        s = random_state(rng, (3,))
        h = embed_ip(random_element(rng, (3,)), s, 1).h
        k = embed_ip(random_element(rng, (3,)), s, 1).h
        sides = clarkson_sides(h, k, s, p)
        assert sides.reversed == (p < 2)
        assert sides.holds(1e-8)


def test_clarkson_equal_at_two(rng):
    s = random_state(rng, (3,))
    h = embed_ip(random_element(rng, (3,)), s, 1).h
    k = embed_ip(random_element(rng, (3,)), s, 1).h
    sides = clarkson_sides(h, k, s, 2.0)
    assert sides.lhs == pytest.approx(sides.rhs, rel=1e-10)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_pixu_random(p, rng):
    for _ in range(10):
        s = random_state(rng, (3,))
        h = embed_ip(random_element(rng, (3,)), s, 1).h
        k = embed_ip(random_element(rng, (3,)), s, 1).h
        sides = pixu_sides(h, k, s, p)
        assert sides.reversed == (p > 2)
        assert sides.holds(1e-8)


def test_inequalities_with_zero_second_argument(rng):
    s = random_state(rng, (3,))
    h = embed_ip(random_element(rng, (3,)), s, 1).h
    zero = AlgebraElement.zeros((3,))
    for p in (1.5, 3.0):
        assert clarkson_sides(h, zero, s, p).holds()
        assert pixu_sides(h, zero, s, p).holds()


def test_pixu_rejects_endpoint(rng):
    s = random_state(rng, (2,))
    with pytest.raises(InvalidExponent):
        pixu_sides(s.element, s.element, s, 1.0)
