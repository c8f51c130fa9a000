import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmed.divergence import bernoulli_kl
from rmed.preference import (
    MatrixParseError,
    MatrixShapeError,
    MatrixValidationError,
    NoCondorcetWinnerError,
    PreferenceMatrix,
    arithmetic,
    best_opponent,
    build,
    condorcet_winner,
    cyclic,
    example1,
    from_csv,
    rmed1_lb_coefficient,
    six_rankers,
    superiors,
    to_csv,
    true_lb_coefficient,
    validate,
)

# 40-digit mpmath brute-force evaluations of the lower-bound sum
EX1_07_TRUE_LB = 2.43063932173594028451
EX1_085_TRUE_LB = 1.95486044805271311660
CYCLIC_TRUE_LB = 0.81507518024609825853
CYCLIC_LB1 = 7.44952442471318148369
SIX_TRUE_LB = 20.73498178610396829922

BUILT = [six_rankers(), cyclic(), arithmetic(), example1(0.7), example1(0.85), arithmetic(11)]


def three_cycle():
    return PreferenceMatrix([[0.5, 0.6, 0.4], [0.4, 0.5, 0.6], [0.6, 0.4, 0.5]])


@pytest.mark.parametrize("m", BUILT)
def test_builders_valid(m):
    assert validate(m) == []


def test_table_entries():
    assert six_rankers().mu(1, 5) == 0.61
    assert cyclic().mu(2, 3) == 0.9
    assert example1(0.5).mu(2, 3) == 0.5
    assert arithmetic().k == 8
    assert arithmetic().mu(1, 8) == pytest.approx(0.85)


def test_validate_violations():
    v = validate(PreferenceMatrix([[0.5, 0.7], [0.4, 0.5]]))
    assert [x.kind for x in v] == ["complement"]
    assert (v[0].i, v[0].j) == (1, 2)
    v = validate(PreferenceMatrix([[0.6, 0.5], [0.5, 0.5]]))
    assert [x.kind for x in v] == ["diagonal"]


def test_structural_errors():
    with pytest.raises(MatrixShapeError):
        PreferenceMatrix([[0.5, 0.5, 0.5], [0.5, 0.5, 0.5]])
    with pytest.raises(MatrixShapeError):
        PreferenceMatrix([[0.5]])


def test_condorcet_winner():
    assert condorcet_winner(six_rankers()) == 1
    assert condorcet_winner(cyclic()) == 1
    assert condorcet_winner(arithmetic()) == 1
    assert condorcet_winner(three_cycle()) is None


def test_superiors():
    assert superiors(cyclic(), 2) == {1, 4}
    assert superiors(six_rankers(), 1) == set()
    assert superiors(example1(0.7), 3) == {1, 2}
    assert superiors(example1(0.5), 3) == {1}  # ties belong to neither side


def test_best_opponent():
    m = cyclic()
    assert [best_opponent(m, i) for i in (2, 3, 4)] == [4, 2, 3]
    assert best_opponent(example1(0.7), 3) == 1
    assert best_opponent(example1(0.85), 3) == 2
    with pytest.raises(ValueError):
        best_opponent(m, 1)
    with pytest.raises(NoCondorcetWinnerError):
        best_opponent(three_cycle(), 2)


def test_example1_threshold_near_079():
    # cost via arm 1 is 0.2/d(0.3), via arm 2 is 0.4/d(1-q); they cross at q ~ 0.7787
    assert best_opponent(example1(0.77), 3) == 1
    assert best_opponent(example1(0.78), 3) == 2


def test_true_lb_values():
    rep = true_lb_coefficient(example1(0.7))
    assert rep.true_lb == pytest.approx(EX1_07_TRUE_LB, rel=1e-12)
    assert rep.minimizers == {2: 1, 3: 1}
    assert true_lb_coefficient(example1(0.85)).true_lb == pytest.approx(EX1_085_TRUE_LB, rel=1e-12)
    rep = true_lb_coefficient(cyclic())
    assert rep.minimizers == {2: 4, 3: 2, 4: 3}
    assert rep.true_lb == pytest.approx(CYCLIC_TRUE_LB, rel=1e-12)
    assert rep.lb1 == pytest.approx(CYCLIC_LB1, rel=1e-12)
    assert rep.true_lb == pytest.approx(sum(rep.terms.values()), rel=1e-15)


def test_lb1_relations():
    six = true_lb_coefficient(six_rankers())
    assert six.lb1 == pytest.approx(six.true_lb, rel=1e-15)
    assert six.true_lb == pytest.approx(SIX_TRUE_LB, rel=1e-12)
    assert rmed1_lb_coefficient(cyclic()) > true_lb_coefficient(cyclic()).true_lb
    m = PreferenceMatrix([[0.5, 0.8], [0.2, 0.5]])
    assert rmed1_lb_coefficient(m) == true_lb_coefficient(m).true_lb


def test_near_half_gap_is_finite():
    m = PreferenceMatrix([[0.5, 0.999], [0.001, 0.5]])
    assert np.isfinite(true_lb_coefficient(m).true_lb)


def test_no_winner_bounds():
    with pytest.raises(NoCondorcetWinnerError):
        true_lb_coefficient(three_cycle())
    with pytest.raises(NoCondorcetWinnerError):
        rmed1_lb_coefficient(three_cycle())


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.3])
def test_example1_domain(bad):
    with pytest.raises(ValueError):
        example1(bad)


@pytest.mark.parametrize("bad", [1, 12])
def test_arithmetic_domain(bad):
    with pytest.raises(ValueError):
        arithmetic(bad)


def test_build_registry():
    assert build("arithmetic") == arithmetic(8)
    assert build("example1", q=0.7) == example1(0.7)
    with pytest.raises(TypeError):
        build("example1")
    with pytest.raises(KeyError):
        build("sushi")


def test_csv_round_trip():
    for m in BUILT:
        assert from_csv(to_csv(m)) == m


def test_csv_errors():
    with pytest.raises(MatrixValidationError) as e:
        from_csv("0.5,0.7\n0.4,0.5\n")
    assert (e.value.violations[0].i, e.value.violations[0].j) == (1, 2)
    with pytest.raises(MatrixShapeError):
        from_csv("0.5\n")
    with pytest.raises(MatrixShapeError):
        from_csv("0.5,0.5\n0.5\n")
    with pytest.raises(MatrixParseError, match="line 2"):
        from_csv("0.5,0.5\n0.5,abc\n")
    with pytest.raises(MatrixShapeError):
        from_csv("")


# ---------------------------------------------------------------- properties


@st.composite
def winner_matrices(draw):
    k = draw(st.integers(2, 7))
    v = np.full((k, k), 0.5)
    for i in range(k):
        for j in range(i + 1, k):
            x = draw(st.floats(0.02, 0.98).filter(lambda x: abs(x - 0.5) > 1e-3))
            v[i, j], v[j, i] = x, 1.0 - x
    w = draw(st.integers(0, k - 1))
    for j in range(k):
        if j != w and v[w, j] < 0.5:
            v[w, j], v[j, w] = v[j, w], v[w, j]
    return PreferenceMatrix(v)


def _brute_true_lb(m, w):
    total = 0.0
    for i in m.arms():
        if i == w:
            continue
        total += min(
            (m.mu(w, i) - 0.5 + m.mu(w, j) - 0.5) / (2 * bernoulli_kl(m.mu(i, j), 0.5))
            for j in m.arms()
            if m.mu(i, j) < 0.5
        )
    return total


@settings(max_examples=200)
@given(winner_matrices())
def test_bound_properties(m):
    w = condorcet_winner(m)
    assert w is not None
    rep = true_lb_coefficient(m)
    assert rep.true_lb <= rmed1_lb_coefficient(m) * (1 + 1e-12)
    assert rep.true_lb == pytest.approx(_brute_true_lb(m, w), rel=1e-12)
    for i in m.arms():
        if i != w:
            assert w in superiors(m, i)
            assert best_opponent(m, i) in superiors(m, i)
            assert rep.terms[i] >= 0
