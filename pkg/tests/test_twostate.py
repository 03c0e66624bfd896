import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from afshar import twostate as ts
from afshar.errors import InvalidParameterError, ParseError, UndefinedConditionalError

O, JX, JZ = ts.BASES["O"], ts.BASES["Jx"], ts.BASES["Jz"]
S, U, L = ts.spin_map("S"), ts.spin_map("U"), ts.spin_map("L")
XP, ZP, ZM = ts.spin_map("x+"), ts.spin_map("z+"), ts.spin_map("z-")


def by_hand_abl(pre, post, basis):
    """ABL from explicit projector matrices, independent of the library's inner products."""
    nums = []
    for k in basis.kets:
        proj = np.outer(k.vector, k.vector.conj())
        nums.append(abs(post.vector.conj() @ proj @ pre.vector) ** 2)
    return np.array(nums) / sum(nums)


@st.composite
def kets(draw):
    a = complex(draw(st.floats(-1, 1)), draw(st.floats(-1, 1)))
    b = complex(draw(st.floats(-1, 1)), draw(st.floats(-1, 1)))
    if abs(a) ** 2 + abs(b) ** 2 < 1e-6:
        a = 1.0
    return ts.Ket2.normalized(a, b)


@st.composite
def bases(draw):
    k = draw(kets())
    return ts.Basis2.completing("B", k)


def test_ket_normalization_enforced():
    with pytest.raises(InvalidParameterError):
        ts.Ket2(1, 1)
    with pytest.raises(InvalidParameterError):
        ts.Ket2.normalized(0, 0)
    k = ts.Ket2.normalized(3, 4j)
    assert abs(k.a) ** 2 + abs(k.b) ** 2 == pytest.approx(1, abs=1e-12)


def test_spin_map_identifications():
    assert ts.spin_map("S") == ts.spin_map("x+")
    assert ts.spin_map("S") == ts.spin_map("x↑")
    assert ts.spin_map("U") == ts.spin_map("z↑")
    assert ts.spin_map("L") == ts.spin_map("z↓")
    assert U.inner(L) == 0
    assert abs(ts.spin_map("R").inner(ts.spin_map("H"))) ** 2 == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ParseError):
        ts.spin_map("Q")


def test_born_examples():
    assert ts.born_probability(S, O, 0) == pytest.approx(0.5, abs=1e-15)
    assert ts.born_probability(U, O, 0) == 1
    assert ts.born_probability(XP, JZ, 0) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(InvalidParameterError):
        ts.born_probability(S, O, 2)


def test_abl_paradox_pair():
    assert ts.abl_probability(XP, ZP, JX, 0) == pytest.approx(1.0, abs=1e-12)
    assert ts.abl_probability(XP, ZP, JZ, 0) == pytest.approx(1.0, abs=1e-12)


def test_abl_orthogonal_pre_post():
    p = ts.abl_distribution(ZP, ZM, JX)
    assert p == pytest.approx((0.5, 0.5), abs=1e-12)
    np.testing.assert_allclose(p, by_hand_abl(ZP, ZM, JX), atol=1e-12)


def test_abl_undefined_conditional():
    with pytest.raises(UndefinedConditionalError):
        ts.abl_probability(ZP, ZM, JZ, 0)


@given(kets(), bases())
def test_born_sums_to_one(state, basis):
    assert sum(ts.born_distribution(state, basis)) == pytest.approx(1, abs=1e-12)


@given(kets(), kets(), bases())
def test_abl_sums_to_one_and_matches_projectors(pre, post, basis):
    try:
        p = ts.abl_distribution(pre, post, basis)
    except UndefinedConditionalError:
        return
    assert sum(p) == pytest.approx(1, abs=1e-12)
    if min(abs(post.inner(k) * k.inner(pre)) for k in basis.kets) > 1e-6 or max(p) < 1:
        np.testing.assert_allclose(p, by_hand_abl(pre, post, basis), atol=1e-9)


@given(kets(), kets(), bases(), st.integers(0, 1))
def test_abl_time_symmetry(pre, post, basis, k):
    try:
        fwd = ts.abl_probability(pre, post, basis, k)
    except UndefinedConditionalError:
        return
    # reversed roles with conjugated amplitudes (time reversal of the pair)
    rev = ts.abl_probability(post.conjugate(), pre.conjugate(),
                             ts.Basis2("Bc", tuple(e.conjugate() for e in basis.kets)), k)
    assert fwd == pytest.approx(rev, abs=1e-12)
    assert fwd == pytest.approx(ts.abl_probability(post, pre, basis, k), abs=1e-12)


@given(bases(), kets(), st.integers(0, 1))
def test_eigenstate_certainty(basis, post, k):
    pre = basis[k]
    if abs(post.inner(pre)) < 1e-6:
        return
    assert ts.abl_probability(pre, post, basis, k) == pytest.approx(1, abs=1e-12)


@given(kets(), kets(), bases(), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_global_phase_invariance(pre, post, basis, ph1, ph2):
    assert ts.born_distribution(pre.phased(ph1), basis) == pytest.approx(ts.born_distribution(pre, basis), abs=1e-12)
    try:
        ref = ts.abl_distribution(pre, post, basis)
    except UndefinedConditionalError:
        return
    got = ts.abl_distribution(pre.phased(ph1), post.phased(ph2), basis)
    assert got == pytest.approx(ref, abs=1e-12)


def test_chain_repeated_eigenstate_measurement():
    r = ts.run_chain(ts.MeasurementChain(XP, (JX,)), 10_000, seed=3)
    assert r.accepted == 10_000
    assert r.frequencies(0) == (1.0, 0.0)


def test_chain_prepare_confirm_postselect():
    chain = ts.MeasurementChain(XP, (JX, JZ), ZP)
    r = ts.run_chain(chain, 100_000, seed=11)
    assert r.frequencies(0)[0] == 1.0
    assert r.frequencies(1)[0] == 1.0
    assert chain.conditional_probabilities(0) == pytest.approx(ts.abl_distribution(XP, ZP, JX), abs=1e-12)
    # acceptance ~ 1/2: the z-measurement finds z+ half the time
    sigma = np.sqrt(0.25 / 100_000)
    assert abs(r.acceptance_rate - 0.5) < 4 * sigma


def test_chain_unbiased_coin():
    n = 100_000
    r = ts.run_chain(ts.MeasurementChain(ZP, (JX,)), n, seed=5)
    sigma = np.sqrt(n * 0.25)
    assert abs(r.sequence_counts[("x+",)] - n / 2) < 4 * sigma


def test_chain_deterministic_for_seed():
    chain = ts.MeasurementChain(ts.spin_map("H"), (ts.BASES["C"], JX), ts.spin_map("R"))
    a = ts.run_chain(chain, 300_000, seed=9)
    b = ts.run_chain(chain, 300_000, seed=9, workers=3)
    assert a.sequence_counts == b.sequence_counts and a.accepted == b.accepted
    assert ts.run_chain(chain, 300_000, seed=10).sequence_counts != a.sequence_counts


@given(kets(), kets(), bases(), st.integers(0, 2**31))
def test_chain_matches_abl(pre, post, basis, seed):
    n = 100_000
    try:
        p = ts.abl_distribution(pre, post, basis)
    except UndefinedConditionalError:
        return
    r = ts.run_chain(ts.MeasurementChain(pre, (basis,), post), n, seed=seed)
    if r.accepted < 100:
        return
    freq = r.frequencies(0)[0]
    sigma = np.sqrt(max(p[0] * (1 - p[0]), 1e-12) / r.accepted)
    assert abs(freq - p[0]) <= 6 * sigma + 1 / r.accepted


def test_parse_chain():
    c = ts.parse_chain("pre=x+ steps=Jx,Jz post=z+")
    assert c.pre == XP and [b.name for b in c.steps] == ["Jx", "Jz"] and c.post == ZP
    c = ts.parse_chain("pre=z+ steps= post=")
    assert c.steps == () and c.post is None
    assert ts.parse_chain(ts.format_chain(ts.MeasurementChain(S, (O,), U))) == ts.MeasurementChain(S, (O,), U)


@pytest.mark.parametrize("text, pos", [
    ("pre=q steps=Jx", 4),
    ("pre=x+ steps=Jx,Jq", 16),
    ("pre=x+ bogus=1", 7),
    ("pre=x+ steps", 7),
    ("steps=Jx", 8),
])
def test_parse_chain_errors_report_position(text, pos):
    with pytest.raises(ParseError) as exc:
        ts.parse_chain(text)
    assert exc.value.position == pos
