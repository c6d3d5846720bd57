from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from mcarsvm import LEGITIMATE as L
from mcarsvm import PHISHING as P
from mcarsvm.mcar import (
    DEFAULT,
    MCARClassifier,
    Rule,
    RuleClassifier,
    build_rule_classifier,
    classify_rule,
    database_coverage_prune,
    find_frequent_ruleitems,
    generate_rules,
    item_tid_lists,
    rank_key,
    rank_rules,
    rule_score,
)

from conftest import small_datasets

# (f1, f2) -> class; the four-row example used throughout
X4 = np.array([[1, 1], [1, -1], [1, 1], [-1, -1]], dtype=np.int8)
Y4 = np.array([L, P, L, P], dtype=np.int8)


# -- oracles ---------------------------------------------------------------------


def brute_force_rules(X, y, min_support, min_confidence, max_length=None):
    """Every antecedent over distinct attributes, every class, by direct counting."""
    n, d = X.shape
    out = set()
    top = d if max_length is None else min(d, max_length)
    for size in range(1, top + 1):
        for attrs in combinations(range(d), size):
            for values in product((-1, 0, 1), repeat=size):
                match = [i for i in range(n) if all(X[i, a] == v for a, v in zip(attrs, values))]
                if not match:
                    continue
                for cls in (P, L):
                    count = sum(1 for i in match if y[i] == cls)
                    supp = count / n
                    conf = count / len(match)
                    if supp >= min_support and conf >= min_confidence:
                        out.add((tuple(zip(attrs, values)), cls, supp, conf))
    return out


def replay_pruning(ranked, X, y):
    """Plain-loop replay of the coverage scan."""
    n = len(y)
    covered = [False] * n
    kept = []
    for rule in ranked:
        if all(covered):
            break
        hits = [i for i in range(n)
                if not covered[i] and all(X[i][a] == v for a, v in rule.antecedent)]
        if not hits:
            continue
        if not any(y[i] == rule.consequent for i in hits):
            continue
        kept.append(rule)
        for i in hits:
            covered[i] = True
    rest = [y[i] for i in range(n) if not covered[i]] or list(y)
    n_l = sum(1 for v in rest if v == L)
    n_p = len(rest) - n_l
    default = L if n_l > n_p else P
    return kept, default, max(n_l, n_p) / len(rest)


def as_tuples(rules):
    return {(r.antecedent, r.consequent, r.support, r.confidence) for r in rules}


def mine(X, y, min_support, min_confidence, max_length=None):
    items = find_frequent_ruleitems(X, y, min_support, max_length)
    return generate_rules(items, min_confidence, len(y))


thresholds = st.floats(min_value=0.01, max_value=1.0, allow_nan=False)


# -- frequent ruleitems ----------------------------------------------------------


def test_four_row_example_frequent_item():
    items = {(ri.antecedent, ri.label): ri for ri in find_frequent_ruleitems(X4, Y4, 0.5)}
    ri = items[(((0, 1),), L)]
    assert ri.tid_list.tolist() == [0, 1, 2]
    assert ri.class_counts == {L: 2, P: 1}
    assert ri.count / 4 == 0.5


def test_four_row_example_infrequent_item():
    items = {(ri.antecedent, ri.label) for ri in find_frequent_ruleitems(X4, Y4, 0.5)}
    assert (((0, -1),), P) not in items


def test_tiny_support_keeps_every_matching_pair():
    items = find_frequent_ruleitems(X4, Y4, 1e-9, max_length=1)
    pairs = {(ri.antecedent[0], ri.label) for ri in items}
    expected = {((a, int(X4[i, a])), int(Y4[i])) for i in range(4) for a in range(2)}
    assert pairs == expected


def test_item_tid_lists_single_scan():
    lists = item_tid_lists(X4)
    assert lists[(0, 1)].tolist() == [0, 1, 2]
    assert lists[(1, -1)].tolist() == [1, 3]
    assert (0, 0) not in lists


@settings(max_examples=200, deadline=None)
@given(data=small_datasets(), min_support=thresholds, min_confidence=thresholds)
def test_mining_matches_brute_force(data, min_support, min_confidence):
    X, y = data
    assert as_tuples(mine(X, y, min_support, min_confidence)) == brute_force_rules(
        X, y, min_support, min_confidence
    )


@settings(max_examples=60, deadline=None)
@given(data=small_datasets(), max_length=st.integers(1, 3))
def test_max_length_truncates_brute_force(data, max_length):
    X, y = data
    got = as_tuples(mine(X, y, 0.1, 0.3, max_length))
    assert got == brute_force_rules(X, y, 0.1, 0.3, max_length)


@settings(max_examples=100, deadline=None)
@given(data=small_datasets(), min_support=thresholds)
def test_tid_lists_match_row_scan(data, min_support):
    X, y = data
    for ri in find_frequent_ruleitems(X, y, min_support):
        mask = np.ones(len(y), dtype=bool)
        for a, v in ri.antecedent:
            mask &= X[:, a] == v
        assert ri.tid_list.tolist() == np.flatnonzero(mask).tolist()
        assert ri.count == int(np.sum(y[mask] == ri.label))


@settings(max_examples=100, deadline=None)
@given(data=small_datasets(), s=st.lists(thresholds, min_size=2, max_size=2),
       c=st.lists(thresholds, min_size=2, max_size=2))
def test_raising_thresholds_never_adds_rules(data, s, c):
    X, y = data
    lo_s, hi_s = sorted(s)
    lo_c, hi_c = sorted(c)
    base = as_tuples(mine(X, y, lo_s, lo_c))
    assert as_tuples(mine(X, y, hi_s, lo_c)) <= base
    assert as_tuples(mine(X, y, lo_s, hi_c)) <= base


def test_invalid_thresholds():
    with pytest.raises(ValueError):
        find_frequent_ruleitems(X4, Y4, 0.0)
    with pytest.raises(ValueError):
        find_frequent_ruleitems(X4, Y4, 1.5)
    with pytest.raises(ValueError):
        generate_rules([], 0.0, 4)
    with pytest.raises(ValueError):
        find_frequent_ruleitems(X4[:0], Y4[:0], 0.5)


# -- rules -----------------------------------------------------------------------


def _f1_rule_items():
    return [ri for ri in find_frequent_ruleitems(X4, Y4, 0.5) if ri.antecedent == ((0, 1),)]


def test_confidence_above_threshold_emits_rule():
    rules = generate_rules(_f1_rule_items(), 0.6, 4)
    assert len(rules) == 1
    assert rules[0].confidence == pytest.approx(2 / 3)
    assert rules[0].consequent == L


def test_confidence_below_threshold_emits_nothing():
    assert generate_rules(_f1_rule_items(), 0.7, 4) == []


@settings(max_examples=60, deadline=None)
@given(data=small_datasets())
def test_full_confidence_means_pure_cover(data):
    X, y = data
    for r in mine(X, y, 0.01, 1.0):
        assert set(y[r.match_mask(X)].tolist()) == {r.consequent}


def test_both_classes_can_pass_at_half_confidence():
    X = np.array([[1], [1]], dtype=np.int8)
    y = np.array([P, L], dtype=np.int8)
    rules = mine(X, y, 0.1, 0.5)
    assert {r.consequent for r in rules} == {P, L}


# -- ranking ---------------------------------------------------------------------


def _rule(conf, supp, size=1, attr=0, cls=L):
    ante = tuple((attr + k, 1) for k in range(size))
    return Rule(ante, cls, supp, conf)


def test_confidence_dominates():
    r1, r2 = _rule(0.90, 0.10), _rule(0.95, 0.05, attr=1)
    assert rank_rules([r1, r2]) == [r2, r1]


def test_support_breaks_confidence_ties():
    r1, r2 = _rule(0.9, 0.2), _rule(0.9, 0.1, attr=1)
    assert rank_rules([r2, r1]) == [r1, r2]


def test_smaller_rules_first():
    r1, r2 = _rule(0.9, 0.1, size=1), _rule(0.9, 0.1, size=2, attr=1)
    assert rank_rules([r2, r1]) == [r1, r2]


def test_lexicographic_ties():
    rules = [_rule(0.8, 0.1, attr=a, cls=c) for a in (2, 0, 1) for c in (L, P)]
    ranked = rank_rules(rules, tie_break="lexicographic")
    assert [(r.antecedent, r.consequent) for r in ranked] == sorted(
        (r.antecedent, r.consequent) for r in rules
    )


def test_random_ties_are_seeded():
    rules = [_rule(0.8, 0.1, attr=a) for a in range(12)]
    a = rank_rules(rules, seed=1)
    assert a == rank_rules(list(reversed(rules)), seed=1)
    assert any(rank_rules(rules, seed=s) != a for s in range(2, 8))
    with pytest.raises(ValueError):
        rank_rules(rules, tie_break="coin")


rule_strategy = st.builds(
    lambda conf, supp, size, attr, cls: _rule(conf, supp, size, attr, cls),
    st.sampled_from([0.5, 0.75, 1.0]),
    st.sampled_from([0.1, 0.2]),
    st.integers(1, 2),
    st.integers(0, 3),
    st.sampled_from([P, L]),
)


@settings(max_examples=100, deadline=None)
@given(rules=st.lists(rule_strategy, max_size=12), seed=st.integers(0, 50),
       mode=st.sampled_from(["random", "lexicographic"]), shuffle_seed=st.integers(0, 1000))
def test_ranking_is_a_total_order(rules, seed, mode, shuffle_seed):
    ranked = rank_rules(rules, seed, mode)
    keys = [rank_key(r) for r in ranked]
    assert keys == sorted(keys)
    assert rank_rules(ranked, seed, mode) == ranked
    perm = np.random.default_rng(shuffle_seed).permutation(len(rules))
    assert rank_rules([rules[i] for i in perm], seed, mode) == ranked


# -- pruning and classification --------------------------------------------------


def test_single_rule_covering_everything():
    X = np.array([[1], [1], [1]], dtype=np.int8)
    y = np.array([L, L, L], dtype=np.int8)
    r = Rule(((0, 1),), L, 1.0, 1.0)
    clf = database_coverage_prune([r], X, y)
    assert clf.rules == (r,)
    assert clf.default_class == L and clf.default_fraction == 1.0


def test_rule_matching_nothing_is_pruned():
    r0 = Rule(((0, 0),), L, 0.5, 1.0)
    r1 = Rule(((0, 1),), L, 0.5, 1.0)
    clf = database_coverage_prune([r0, r1], X4, Y4)
    assert r0 not in clf.rules and r1 in clf.rules


def test_rule_misclassifying_all_uncovered_rows_is_pruned():
    wrong = Rule(((0, -1),), L, 0.0, 0.0)
    clf = database_coverage_prune([wrong], X4, Y4)
    assert clf.rules == ()
    assert clf.default_class == P  # 2-2 tie resolves to PHISHING


@settings(max_examples=200, deadline=None)
@given(data=small_datasets(), min_support=thresholds, min_confidence=thresholds,
       seed=st.integers(0, 100))
def test_pruning_matches_replay(data, min_support, min_confidence, seed):
    X, y = data
    ranked = rank_rules(mine(X, y, min_support, min_confidence), seed)
    clf = database_coverage_prune(ranked, X, y)
    kept, default, frac = replay_pruning(ranked, X.tolist(), y.tolist())
    assert list(clf.rules) == kept
    assert clf.default_class == default
    assert clf.default_fraction == pytest.approx(frac)


@settings(max_examples=50, deadline=None)
@given(data=small_datasets(), x=st.lists(st.sampled_from([-1, 0, 1]), min_size=4, max_size=4))
def test_classifier_is_total(data, x):
    X, y = data
    clf = build_rule_classifier(X, y, 0.1, 0.5)
    label, rule = classify_rule(clf, x[: X.shape[1]])
    assert label in (P, L)
    assert rule is DEFAULT or rule in clf.rules


def test_classify_examples():
    r = Rule(((0, 1),), L, 0.5, 0.9)
    clf = RuleClassifier((r,), P, 0.6, 2)
    assert classify_rule(clf, [1, 0]) == (L, r)
    assert classify_rule(clf, [-1, 0]) == (P, DEFAULT)
    first = Rule(((1, 0),), P, 0.5, 0.8)
    two = RuleClassifier((first, r), P, 0.6, 2)
    assert classify_rule(two, [1, 0]) == (P, first)
    with pytest.raises(ValueError):
        classify_rule(clf, [1])


def test_rule_score_examples():
    legit = RuleClassifier((Rule(((0, 1),), L, 0.5, 0.9),), L, 0.6, 1)
    phish = RuleClassifier((Rule(((0, 1),), P, 0.5, 0.8),), L, 0.6, 1)
    assert rule_score(legit, [1]) == pytest.approx(0.9)
    assert rule_score(phish, [1]) == pytest.approx(-0.8)
    assert rule_score(legit, [0]) == pytest.approx(0.3)


def test_vectorised_paths_agree_with_classify(rng):
    X = rng.choice([-1, 0, 1], size=(60, 4)).astype(np.int8)
    y = np.where(X[:, 0] + X[:, 1] > 0, L, P).astype(np.int8)
    clf = build_rule_classifier(X, y, 0.05, 0.6)
    for i, x in enumerate(X):
        label, _ = clf.classify(x)
        assert clf.predict(X)[i] == label
        assert clf.decision_function(X)[i] == pytest.approx(clf.score(x))


# -- estimator -------------------------------------------------------------------


def test_estimator_fit_predict_explain(rng):
    X = rng.choice([-1, 0, 1], size=(200, 5)).astype(np.int8)
    y = np.where(X[:, 2] == 1, L, P).astype(np.int8)
    est = MCARClassifier(min_support=0.05, min_confidence=0.8).fit(X, y)
    assert est.score(X, y) == 1.0
    explanations = est.explain(X[:3])
    assert all(e is DEFAULT or isinstance(e, Rule) for e in explanations)
    assert set(est.classes_.tolist()) == {P, L}
    params = clone(est).get_params()
    assert params["min_support"] == 0.05 and params["min_confidence"] == 0.8


def test_estimator_is_deterministic(rng):
    X = rng.choice([-1, 0, 1], size=(100, 6)).astype(np.int8)
    y = rng.choice([P, L], size=100).astype(np.int8)
    a = MCARClassifier(random_state=3).fit(X, y).rule_classifier_
    b = MCARClassifier(random_state=3).fit(X, y).rule_classifier_
    assert a == b


def test_estimator_rejects_bad_input():
    with pytest.raises(ValueError, match="non-ternary"):
        MCARClassifier().fit([[2], [1]], [1, -1])
    one_class = MCARClassifier().fit([[1], [0]], [1, 1])
    assert one_class.predict([[-1]]).tolist() == [L]
    est = MCARClassifier(min_support=0.3).fit(X4, Y4)
    with pytest.raises(ValueError):
        est.predict([[1, 0, 0]])
