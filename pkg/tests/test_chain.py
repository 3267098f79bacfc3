import itertools

import pytest
from hypothesis import given, strategies as st

from contourchain.chain import (
    ChainState,
    LeftPriority,
    LongCluster,
    OddEven,
    RightPriority,
    Side,
    TableRule,
    all_states,
    cluster_stats,
    find_competitions,
    is_free_movement,
    long_cluster_direction,
    make_state,
    move_mask,
    resolve,
    rule_from_name,
    step_deterministic,
    step_with_winners,
)

from conftest import builtin_rules
from oracles import pairwise_competitions, rotation_scan_runs, traced_mask

S = ChainState.from_string


def states_up_to(n_max):
    for n in range(2, n_max + 1):
        yield from all_states(n)


@st.composite
def chain_states(draw, n_min=2, n_max=12):
    n = draw(st.integers(n_min, n_max))
    return ChainState(n, tuple(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))))


class TestState:
    def test_paper_states(self):
        e3 = make_state(3, [0, 1, 1])
        assert e3.cells == (0, 1, 1)
        assert str(e3) == "011"
        assert make_state(3, [0, 0, 0]).code == 0

    @pytest.mark.parametrize("n,bits", [(1, [0]), (3, [0, 1]), (3, [0, 2, 1]), (0, [])])
    def test_rejects_bad_input(self, n, bits):
        with pytest.raises(ValueError):
            make_state(n, bits)

    def test_code_round_trip(self):
        for x in states_up_to(8):
            assert ChainState.from_code(x.n, x.code) == x
            assert ChainState.from_string(str(x)) == x

    def test_code_bit_order(self):
        assert S("100").code == 1
        assert S("011").code == 6

    def test_bad_strings(self):
        for s in ["", "012", "0 1"]:
            with pytest.raises(ValueError):
                ChainState.from_string(s)


class TestCompetitions:
    def test_examples(self):
        assert [c.node for c in find_competitions(S("011"))] == [0]
        assert find_competitions(S("000")) == []
        assert [c.node for c in find_competitions(S("0101"))] == [0, 2]

    def test_competition_fields(self):
        (c,) = find_competitions(S("0011"))
        assert (c.node, c.left_particle, c.right_particle) == (1, 1, 2)
        (c,) = find_competitions(S("1110"))
        assert (c.node, c.left_particle, c.right_particle) == (3, 3, 0)

    def test_matches_pairwise_scan(self):
        for x in states_up_to(10):
            nodes = [c.node for c in find_competitions(x)]
            assert nodes == pairwise_competitions(x.cells)
            n = x.n
            ten = sum(1 for i in range(n) if (x[i], x[i + 1]) == (1, 0))
            assert len(nodes) == ten

    def test_disjoint(self):
        for x in states_up_to(12):
            seen = [p for c in find_competitions(x) for p in (c.left_particle, c.right_particle)]
            assert len(seen) == len(set(seen))


class TestClusterStats:
    @pytest.mark.parametrize("s,l0,l1", [
        ("00110", 3, 2), ("111", 0, 3), ("011", 1, 2), ("000000", 6, 0), ("10", 1, 1),
    ])
    def test_examples(self, s, l0, l1):
        st_ = cluster_stats(S(s))
        assert (st_.l0, st_.l1, st_.l) == (l0, l1, min(l0, l1))

    def test_against_rotation_scan(self):
        for x in states_up_to(10):
            assert tuple(cluster_stats(x)) == rotation_scan_runs(x.cells)

    @given(chain_states())
    def test_invariants(self, x):
        s = cluster_stats(x)
        const = is_free_movement(x)
        assert 0 <= s.l0 <= x.n and 0 <= s.l1 <= x.n
        assert (s.l0 == x.n) == (x.code == 0)
        assert (s.l1 == x.n) == (x.code == (1 << x.n) - 1)
        if not const:
            assert s.l0 + s.l1 <= x.n
        assert (s.l == 0) == const


class TestRules:
    @pytest.mark.parametrize("s,side", [("011", Side.RIGHT), ("0101", Side.LEFT),
                                        ("000110", Side.LEFT)])
    def test_long_cluster_direction(self, s, side):
        assert long_cluster_direction(S(s)) is side

    def test_resolve_examples(self):
        x = S("011")
        (c,) = find_competitions(x)
        assert resolve(LeftPriority(), x, c) is Side.LEFT
        assert resolve(LongCluster(), x, c) is Side.RIGHT
        y = S("0101")
        c0 = find_competitions(y)[0]
        assert resolve(OddEven(4), y, c0) is Side.LEFT

    def test_odd_even_picks_even_particle(self):
        for n in (2, 4, 6, 8):
            rule = OddEven(n)
            for x in all_states(n):
                for c in find_competitions(x):
                    w = rule.resolve(x, c)
                    winner = c.left_particle if w is Side.LEFT else c.right_particle
                    assert winner % 2 == 0

    def test_odd_even_needs_even_n(self):
        with pytest.raises(ValueError):
            OddEven(5)
        with pytest.raises(ValueError):
            rule_from_name("odd-even", 3)
        with pytest.raises(ValueError):
            move_mask(S("011"), OddEven(4))

    def test_rule_names(self):
        assert isinstance(rule_from_name("left", 3), LeftPriority)
        assert isinstance(rule_from_name("right", 3), RightPriority)
        assert isinstance(rule_from_name("long-cluster", 3), LongCluster)
        with pytest.raises(ValueError):
            rule_from_name("random", 3)

    def test_table_rule(self):
        table = {(x.code, c.node): Side.RIGHT for x in all_states(4) for c in find_competitions(x)}
        rule = TableRule(4, table)
        for x in all_states(4):
            assert step_deterministic(x, rule) == step_deterministic(x, RightPriority())

    def test_table_rule_must_be_total(self):
        with pytest.raises(ValueError):
            TableRule(3, {})


class TestStep:
    def test_mask_examples(self):
        assert move_mask(S("011"), LeftPriority()) == (1, 0, 1)
        for rule in builtin_rules(4):
            assert move_mask(S("0000"), rule) == (1, 1, 1, 1)
        assert move_mask(S("000110"), LongCluster()) == (1, 1, 1, 0, 1, 1)

    def test_step_examples(self):
        assert step_deterministic(S("011"), LeftPriority()) == S("110")
        assert step_deterministic(S("011"), LongCluster()) == S("000")
        for rule in builtin_rules(4):
            assert step_deterministic(S("0000"), rule) == S("1111")

    def test_mask_matches_traced_semantics(self):
        for x in states_up_to(9):
            for rule in builtin_rules(x.n):
                def winner_of(node, x=x, rule=rule):
                    c = next(c for c in find_competitions(x) if c.node == node)
                    return rule.resolve(x, c).value
                assert move_mask(x, rule) == traced_mask(x.cells, winner_of)

    def test_mask_shape(self):
        for x in states_up_to(10):
            comps = find_competitions(x)
            in_comp = {p for c in comps for p in (c.left_particle, c.right_particle)}
            for rule in builtin_rules(x.n):
                m = move_mask(x, rule)
                assert all(m[i] == 1 for i in range(x.n) if i not in in_comp)
                for c in comps:
                    assert m[c.left_particle] + m[c.right_particle] == 1

    def test_step_flips_mask(self):
        for x in states_up_to(8):
            for rule in builtin_rules(x.n):
                y = step_deterministic(x, rule)
                m = move_mask(x, rule)
                assert all((a != b) == bool(f) for a, b, f in zip(x.cells, y.cells, m))

    def test_free_movement_closed(self):
        for n in range(2, 10):
            for code in (0, (1 << n) - 1):
                x = ChainState.from_code(n, code)
                for rule in builtin_rules(n):
                    assert move_mask(x, rule) == (1,) * n
                    assert is_free_movement(step_deterministic(x, rule))

    def test_free_movement_examples(self):
        assert is_free_movement(S("000"))
        assert is_free_movement(S("1111"))
        assert not is_free_movement(S("011"))

    def test_long_cluster_decrement(self):
        for x in states_up_to(12):
            l = cluster_stats(x).l
            if l >= 1:
                assert cluster_stats(step_deterministic(x, LongCluster())).l == l - 1

    def test_lemma1_all_assignments(self):
        for x in states_up_to(10):
            l = cluster_stats(x).l
            k = len(find_competitions(x))
            for winners in itertools.product(list(Side), repeat=k):
                assert cluster_stats(step_with_winners(x, winners)).l >= l - 1

    def test_left_right_conjugacy(self):
        def flip(x):
            n = x.n
            return ChainState(n, tuple(1 - x.cells[n - 1 - j] for j in range(n)))

        for x in states_up_to(8):
            assert flip(step_deterministic(x, LeftPriority())) == \
                step_deterministic(flip(x), RightPriority())

    def test_rotation_equivariance(self):
        def rot(x, k):
            return ChainState(x.n, tuple(x[i + k] for i in range(x.n)))

        for x in states_up_to(8):
            for rule in (LeftPriority(), RightPriority(), LongCluster()):
                for k in range(x.n):
                    assert step_deterministic(rot(x, k), rule) == rot(step_deterministic(x, rule), k)

    @given(chain_states(n_max=20))
    def test_long_cluster_decrement_large(self, x):
        l = cluster_stats(x).l
        if l >= 1:
            assert cluster_stats(step_deterministic(x, LongCluster())).l == l - 1
