"""Arc coordinates, conjugator synthesis, and kernel candidate checks."""

import doctest
import itertools
import random
from fractions import Fraction

import pytest

import geom_oracle
import noodlefork.kernelgen
from noodlefork.braids import BraidWord, commutator, parse_word
from noodlefork.burau import GENERIC, burau
from noodlefork.forkpair import ForkSpec, build_diagram, pairing_exact
from noodlefork.kernelgen import (
    ArcCoords,
    BadRange,
    KernelCandidate,
    SynthesisFailed,
    Unreachable,
    VerificationFailed,
    _arc_reading,
    _canonical_cycle,
    _synthesize,
    build_candidate,
    coords_action,
    full_twist_word,
    synthesize_conjugator,
    verify_candidate,
)
from noodlefork.laurent import LaurentPoly

K108 = ForkSpec.from_text("n=4;c=24,18,11,0;ends=1,3")
PSI_TEXT = "a^-3 b^-2 c^-1 b c^4 b^-1 c b a b c^2 b a^-1 b^-1 c^-2"

GENS4 = (1, -1, 2, -2, 3, -3)


def connected_specs(kcap):
    for counts in itertools.product(range(kcap), repeat=4):
        for ends in itertools.combinations(range(1, 5), 2):
            spec = ForkSpec(4, counts, ends)
            if spec.k == 0:
                continue
            try:
                build_diagram(spec)
            except Exception:
                continue
            yield spec


def random_word(rng, length, n=4):
    gens = tuple(g for i in range(1, n) for g in (i, -i))
    return BraidWord(n, tuple(rng.choice(gens) for _ in range(length))).free_reduce()


def test_docstrings():
    failures, _ = doctest.testmod(noodlefork.kernelgen)
    assert failures == 0


# -- cyclic canonical form -------------------------------------------------------


def test_canonical_cycle_reduces():
    assert _canonical_cycle((1, -1)) == ()
    assert _canonical_cycle((2, 1, -2, 2, -1, -2)) == ()
    # cyclic reduction cancels across the seam
    assert _canonical_cycle((1, 2, 3, -1)) == _canonical_cycle((2, 3))


def test_canonical_cycle_rotation_and_inversion():
    rng = random.Random(11)
    for _ in range(200):
        w = tuple(rng.choice(GENS4) for _ in range(rng.randint(1, 12)))
        base = _canonical_cycle(w)
        k = rng.randrange(max(len(w), 1))
        assert _canonical_cycle(w[k:] + w[:k]) == base
        assert _canonical_cycle(tuple(-s for s in reversed(w))) == base


# -- arc coordinates -------------------------------------------------------------


def test_standard_arcs():
    std = ArcCoords.standard(4, 2)
    assert std.endpoints == (2, 3)
    assert std.curve == _canonical_cycle((2, 3))
    assert std.standard_index() == 2
    for i in (1, 2, 3):
        assert ArcCoords.standard(4, i).standard_index() == i
    with pytest.raises(BadRange):
        ArcCoords.standard(4, 4)
    with pytest.raises(BadRange):
        ArcCoords.standard(4, 0)


def test_coords_validation():
    with pytest.raises(ValueError):
        ArcCoords(4, (2, 2), (2, 3))
    with pytest.raises(ValueError):
        ArcCoords(4, (0, 2), (2,))
    with pytest.raises(ValueError):
        ArcCoords(4, (1, 2), (1, 2, 5))
    # net winding must be +-1 exactly at the endpoints
    with pytest.raises(ValueError):
        ArcCoords(4, (1, 2), (1, 3))
    with pytest.raises(ValueError):
        ArcCoords(4, (1, 2), (1, -2))
    with pytest.raises(ValueError):
        ArcCoords(4, (1, 2), (1, 2, 2))


def test_walls_shape():
    rng = random.Random(23)
    for _ in range(50):
        c = coords_action(random_word(rng, 8), ArcCoords.standard(4, rng.randint(1, 3)))
        walls = c.walls
        assert walls[0] == walls[-1] == 0
        assert all(v % 2 == 0 for v in walls)
        assert c.complexity == sum(walls)
    assert ArcCoords.standard(4, 1).walls == (0, 2, 0, 0, 0)


# -- reading the layout ----------------------------------------------------------


def test_from_spec_degenerate_is_standard():
    for i in (1, 2):
        spec = ForkSpec(4, (0, 0, 0, 0), (i, i + 1))
        assert spec.is_degenerate
        assert ArcCoords.from_spec(spec) == ArcCoords.standard(4, i)


def test_from_spec_single_crossing():
    spec = ForkSpec(4, (0, 0, 0, 0), (3, 4))
    assert spec.k == 1
    assert ArcCoords.from_spec(spec) == ArcCoords.standard(4, 3)
    wide = ArcCoords.from_spec(ForkSpec(4, (0, 0, 0, 0), (1, 4)))
    assert wide.curve == (-4, -1)


def test_from_spec_frozen_small_case():
    got = ArcCoords.from_spec(ForkSpec(4, (0, 0, 0, 1), (3, 4)))
    assert got.curve == (-4, -3, 4, 1, 2, -4, -2, -1)
    assert got.walls == (0, 4, 4, 6, 0)


def test_from_spec_reference_case():
    coords = ArcCoords.from_spec(K108)
    assert coords.endpoints == (1, 3)
    assert len(coords.curve) == 216
    assert coords.walls == (0, 98, 170, 216, 0)


def test_reading_matches_geometric_oracle():
    for spec in connected_specs(3):
        assert geom_oracle.read_rays(spec) == _arc_reading(spec), spec
    assert geom_oracle.read_rays(K108) == _arc_reading(K108)


# -- the braid action ------------------------------------------------------------


def test_action_is_a_group_action():
    rng = random.Random(31)
    for _ in range(40):
        u = random_word(rng, rng.randint(0, 6))
        v = random_word(rng, rng.randint(0, 6))
        c = coords_action(random_word(rng, 5), ArcCoords.standard(4, rng.randint(1, 3)))
        assert coords_action(u * v, c) == coords_action(u, coords_action(v, c))


def test_half_twist_preserves_its_own_arc():
    std = ArcCoords.standard(4, 1)
    assert coords_action(BraidWord(4, (1,)), std) == std
    assert coords_action(BraidWord(4, (-1,)), std) == std


def test_generators_permute_endpoints():
    rng = random.Random(37)
    for _ in range(30):
        c = coords_action(random_word(rng, 6), ArcCoords.standard(4, rng.randint(1, 3)))
        for i in (1, 2, 3):
            swap = {i: i + 1, i + 1: i}
            for sign in (i, -i):
                moved = coords_action(BraidWord(4, (sign,)), c)
                want = tuple(sorted(swap.get(e, e) for e in c.endpoints))
                assert moved.endpoints == want


def test_boundary_twist_fixes_every_arc():
    delta2 = parse_word("a b c a b a", 4) ** 2
    rng = random.Random(41)
    for _ in range(20):
        c = coords_action(random_word(rng, 7), ArcCoords.standard(4, rng.randint(1, 3)))
        assert coords_action(delta2, c) == c
    ref = ArcCoords.from_spec(K108)
    assert coords_action(delta2, ref) == ref


# -- conjugator synthesis --------------------------------------------------------


def test_synthesize_standard_target_is_trivial():
    for i in (1, 2, 3):
        w = synthesize_conjugator(ArcCoords.standard(4, i))
        assert w.letters == ()


def test_synthesize_round_trips():
    rng = random.Random(47)
    for _ in range(30):
        v = random_word(rng, rng.randint(0, 12))
        band = rng.randint(1, 3)
        target = coords_action(v, ArcCoords.standard(4, band))
        w = synthesize_conjugator(target)
        assert any(
            coords_action(w, ArcCoords.standard(4, b)) == target for b in (1, 2, 3)
        )


def test_synthesize_every_small_spec():
    for spec in connected_specs(3):
        w, band = _synthesize(ArcCoords.from_spec(spec), 10_000, 512)
        assert coords_action(w, ArcCoords.standard(4, band)) == ArcCoords.from_spec(spec)


def test_synthesize_reference_spec():
    w = synthesize_conjugator(K108)
    target = ArcCoords.from_spec(K108)
    assert any(
        coords_action(w, ArcCoords.standard(4, b)) == target for b in (1, 2, 3)
    )
    assert len(w.letters) <= 24


def test_synthesize_budget_exhaustion():
    with pytest.raises(Unreachable):
        synthesize_conjugator(K108, budget=2)


# -- pairing against the Burau column --------------------------------------------


def _unit_free(poly):
    """Coefficients low to high with the degree shift and a global sign
    normalized away."""
    cs = tuple(poly.coeffs)
    while cs and cs[0] == 0:
        cs = cs[1:]
    while cs and cs[-1] == 0:
        cs = cs[:-1]
    if cs and cs[0] < 0:
        cs = tuple(-c for c in cs)
    return cs


def _mirrored(poly):
    cs = tuple(reversed(_unit_free(poly)))
    if cs and cs[0] < 0:
        cs = tuple(-c for c in cs)
    return cs


def test_pairing_is_mirrored_burau_entry():
    # The layout pairing of a spec equals, up to a unit, the q -> 1/q
    # mirror of the Burau entry [n-2][band-1] of its conjugator.
    for spec in connected_specs(3):
        w, band = _synthesize(ArcCoords.from_spec(spec), 10_000, 512)
        entry = burau(w, GENERIC).rows[spec.n - 2][band - 1]
        assert _unit_free(pairing_exact(spec).exact) == _mirrored(entry), spec


def test_reference_word_burau_entry():
    psi = parse_word(PSI_TEXT, 4)
    entry = burau(psi.inverse(), GENERIC).rows[2][1]
    assert entry == LaurentPoly(-3, (-2, 9, -18, 25, -25, 18, -9, 2))
    # anti-palindromic: the mirror involution only changes the unit
    assert _unit_free(entry) == _mirrored(entry)


# -- full twists -----------------------------------------------------------------


def test_full_twist_words():
    assert full_twist_word(4, 2).letters == (1, 1)
    assert full_twist_word(4, 4).to_text() == "a b c a b c a b c a b c"
    with pytest.raises(BadRange):
        full_twist_word(4, 1)
    with pytest.raises(BadRange):
        full_twist_word(4, 5)


def test_full_twist_is_central_scalar():
    # On all three strands of B_3 the full twist is the scalar q^3.
    m = burau(full_twist_word(3, 3), GENERIC)
    q3 = LaurentPoly(3, (1,))
    assert m.rows[0][0] == q3 and m.rows[1][1] == q3
    assert m.rows[0][1].is_zero() and m.rows[1][0].is_zero()


# -- verification reports --------------------------------------------------------


def test_verify_trivial_word():
    report = verify_candidate(BraidWord(4, ()), ("generic", 2))
    assert report.artin_trivial
    assert report.generic_identity is True
    assert report.identity_at(2) is True
    assert report.kernel_points() == ()


def test_verify_single_generator():
    report = verify_candidate(BraidWord(4, (1,)), ("generic", 2, Fraction(1, 2)))
    assert not report.artin_trivial
    assert report.generic_identity is False
    assert report.identity_at(2) is False
    assert report.identity_at(Fraction(1, 2)) is False
    assert report.kernel_points() == ()
    assert report.identity_at(7) is None


def test_verify_reference_kernel_element():
    psi = parse_word(PSI_TEXT, 4)
    beta = commutator(
        full_twist_word(4, 3), psi.inverse() * parse_word("b", 4) * psi
    )
    report = verify_candidate(beta, ("generic", 2, Fraction(1, 2)))
    assert not report.artin_trivial
    assert report.generic_identity is False
    assert report.identity_at(2) is True
    assert report.identity_at(Fraction(1, 2)) is True
    assert report.kernel_points() == ("2", "1/2")
    assert report.to_json()["per_q0"] == {"2": True, "1/2": True}


# -- kernel candidates -----------------------------------------------------------


def test_build_candidate_preconditions():
    with pytest.raises(ValueError):
        build_candidate(K108, 0)
    with pytest.raises(ValueError):
        build_candidate(K108, 3)  # pairing does not vanish at 3
    with pytest.raises(ValueError):
        build_candidate(K108)  # pairing is not identically zero
    with pytest.raises(SynthesisFailed):
        build_candidate(K108, 2, budget=2)


def test_build_candidate_from_reference_spec():
    cand = build_candidate(K108, 2)
    assert cand.word.exponent_sum == 0
    assert cand.twist_exponent in (1, 2)
    assert cand.twist_strands == 3
    assert not cand.report.artin_trivial
    assert cand.report.generic_identity is False
    assert cand.report.identity_at(2) is True
    assert cand.report.identity_at(Fraction(1, 2)) is True
    # the conjugator satisfies the defining coordinate equation
    target = ArcCoords.from_spec(K108)
    assert coords_action(
        cand.conjugator, ArcCoords.standard(4, cand.band)
    ) == target
    data = cand.to_json()
    assert data["provenance"]["spec"] == K108.to_text()
    assert data["checks"]["per_q0"] == {"2": True, "1/2": True}


def test_candidate_exponent_sum_guard():
    word = BraidWord(4, (1,))
    report = verify_candidate(word, (2,))
    with pytest.raises(ValueError):
        KernelCandidate(word, K108, BraidWord(4, ()), 1, 1, 3, report)
