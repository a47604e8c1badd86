import random

import pytest

from brrkit.query import (
    QueryCursor,
    QueryPattern,
    cursor_next,
    extend_stack,
    find_product,
    parse_query_pattern,
    render_query_result,
    run_query,
    subtree_ids,
)
from brrkit.terms import occurs_subterm, parse, print_term, subterms
from helpers import (
    CHAIN_RULES,
    REV_RULES,
    REVERSE_RULES,
    make_record,
    mk,
    random_forest,
    random_term,
    run_session,
)

REVAPPEND_SCRIPT = """
(with-brr-data (thm (implies (and (natp n) (< n (len x)))
                             (equal (nth n (revappend x y))
                                    (nth n (reverse x))))))
(cw-gstack-for-subterm (rev x))
"""

REVERSE_SCRIPT = """
(with-brr-data (thm (equal (nth n (reverse x)) (foo n x))))
"""


def flat_scan_oracle(data, instance, mode="subterm", excluded=frozenset()):
    """Independent linear scan in application order."""
    out = []

    def walk(rs):
        for r in rs:
            if id(r) in excluded:
                continue
            out.append(r)
            walk(r.completed)

    walk(data)
    for r in out:
        if r.post.brr_result is None:
            continue
        if mode == "subterm":
            if occurs_subterm(instance, r.post.brr_result) and \
                    not occurs_subterm(instance, r.pre.target):
                return r
        else:
            if r.post.brr_result == instance and r.pre.target != instance:
                return r
    return None


class TestFindProduct:
    def test_product_is_revappend_removal(self):
        session, out = run_session(REVAPPEND_SCRIPT, REV_RULES)
        found = find_product(session.brr_data_cache, QueryPattern(mk("(REV X)", {"X"})))
        assert found is not None
        product, instance = found
        assert product.pre.lemma.rune.name == "REVAPPEND-REMOVAL"
        assert print_term(product.post.brr_result) == "(BINARY-APPEND (REV X) Y)"
        assert print_term(instance) == "(REV X)"

    def test_term_present_in_goal_is_never_introduced(self):
        session, _ = run_session(REVAPPEND_SCRIPT, REV_RULES)
        found = find_product(session.brr_data_cache,
                             QueryPattern(mk("(REVAPPEND X Y)", {"X", "Y"})))
        assert found is None

    def test_free_pattern_picks_first_instance(self):
        rules = REV_RULES + """
        (defrule g-intro :class :rewrite :lhs (g x) :rhs (rev (coerce x 'list)))
        """
        session, _ = run_session("(with-brr-data (thm (p (g a))))", rules)
        pat = parse_query_pattern(parse("(:free (w) (rev w))"), {"A"})
        found = find_product(session.brr_data_cache, pat)
        assert found is not None
        _, instance = found
        assert print_term(instance) == "(REV (COERCE A 'LIST))"

    def test_free_instance_check_excludes_target_occurrences(self):
        # the instance found must be introduced, not just present
        session, _ = run_session(REVAPPEND_SCRIPT, REV_RULES)
        pat = parse_query_pattern(parse("(:free (w) (rev w))"), {"X", "Y", "N"})
        found = find_product(session.brr_data_cache, pat)
        assert found is not None
        product, instance = found
        assert not occurs_subterm(instance, product.pre.target)
        assert occurs_subterm(instance, product.post.brr_result)

    def test_matches_flat_scan_oracle_on_random_forests(self):
        rng = random.Random(99)
        agreements = 0
        for _ in range(200):
            forest = random_forest(rng)
            instance = random_term(rng, 2)
            got = find_product(forest, QueryPattern(instance))
            expected = flat_scan_oracle(forest, instance)
            assert (got is None) == (expected is None)
            if got is not None:
                assert got[0] is expected
                agreements += 1
        assert agreements > 10


class TestExtendStack:
    def test_reverse_world_extends_past_product(self):
        session, _ = run_session(REVERSE_SCRIPT, REVERSE_RULES)
        res = run_query(session.brr_data_cache, QueryPattern(mk("(REV X)", {"X"})), "subterm")
        assert res.product.pre.lemma.rune.name == "REVERSE"
        assert print_term(res.final_result) == "(REV X)"
        assert res.product_result is not None
        assert print_term(res.product_result) == \
            "(IF (STRINGP X) (COERCE (REV (COERCE X 'LIST)) 'STRING) (REV X))"
        # the stack runs from the clause frame to the deepest suitable child
        assert len(res.stack) == 10

    def test_no_suitable_child_stack_stops_at_product(self):
        session, _ = run_session(REVAPPEND_SCRIPT, REV_RULES)
        res = run_query(session.brr_data_cache, QueryPattern(mk("(REV X)", {"X"})), "subterm")
        assert res.product_result is None
        assert res.stack == res.product.pre.gstack

    def test_chain_descends_through_all_suitable_children(self):
        session, _ = run_session("(with-brr-data (thm (p (f1 a))))", CHAIN_RULES)
        res = run_query(session.brr_data_cache, QueryPattern(mk("(F3 A)", {"A"})), "subterm")
        assert res.product.pre.lemma.rune.name == "R1"
        deepest = res.product.completed[-1]
        assert res.stack == deepest.pre.gstack
        assert print_term(res.final_result) == "(F3 A)"
        assert print_term(res.product_result) == "(F3 A)"

    def test_last_suitable_child_chosen(self):
        a = make_record(mk("(G1 X)", {"X"}), mk("(H (REV X) 'A)", {"X"}), ("r", "s1"))
        b = make_record(mk("(G2 X)", {"X"}), mk("(H (REV X) 'B)", {"X"}), ("r", "s2"))
        parent = make_record(mk("(G0 X)", {"X"}), mk("(H (REV X) 'B)", {"X"}), ("r",),
                             children=(a, b))
        stack, final, product_result = extend_stack(parent, mk("(REV X)", {"X"}))
        assert stack == ("r", "s2")
        assert final == b.post.brr_result


class TestModes:
    def test_term_mode_requires_exact_result(self):
        session, _ = run_session(REVERSE_SCRIPT, REVERSE_RULES)
        res = run_query(session.brr_data_cache, QueryPattern(mk("(REV X)", {"X"})), "term")
        # first record whose whole result is (REV X): the inner
        # revappend-removal application at frame 8
        assert res.product.pre.lemma.rune.name == "REVAPPEND-REMOVAL"
        assert print_term(res.product.pre.target) == "(REVAPPEND X 'NIL)"

    def test_term_mode_oracle_agreement(self):
        rng = random.Random(17)
        for _ in range(100):
            forest = random_forest(rng)
            instance = random_term(rng, 2)
            got = find_product(forest, QueryPattern(instance), "term")
            expected = flat_scan_oracle(forest, instance, "term")
            assert (got is None) == (expected is None)
            if got is not None:
                assert got[0] is expected


class TestIterativeQueries:
    def test_two_introductions_two_results(self):
        rules = """
        (defrule i1 :class :rewrite :lhs (g1 x) :rhs (h (rev x)))
        (defrule i2 :class :rewrite :lhs (g2 x) :rhs (k (rev x)))
        """
        session, _ = run_session("(with-brr-data (thm (p (g1 a) (g2 a))))", rules)
        cursor = QueryCursor(QueryPattern(mk("(REV A)", {"A"})), "subterm")
        _, first = cursor_next(session.brr_data_cache, cursor)
        _, second = cursor_next(session.brr_data_cache, cursor)
        assert first.product.pre.lemma.rune.name == "I1"
        assert second.product.pre.lemma.rune.name == "I2"

    def test_exhausted_cursor(self):
        session, _ = run_session("(with-brr-data (thm (p (f1 a))))", CHAIN_RULES)
        cursor = QueryCursor(QueryPattern(mk("(F3 A)", {"A"})), "subterm")
        _, first = cursor_next(session.brr_data_cache, cursor)
        text, second = cursor_next(session.brr_data_cache, cursor)
        assert first is not None and second is None
        assert text == "No further rule applications found."

    def test_excluded_subtrees_never_reappear(self):
        session, _ = run_session("(with-brr-data (thm (p (f1 a))))", CHAIN_RULES)
        cursor = QueryCursor(QueryPattern(mk("(F3 A)", {"A"})), "subterm")
        _, first = cursor_next(session.brr_data_cache, cursor)
        # the product's child (r2, which also carries (F3 A)) is excluded too
        assert subtree_ids(first.product) <= cursor.excluded
        _, second = cursor_next(session.brr_data_cache, cursor)
        assert second is None

    def test_repl_star_commands(self):
        script = """
        (with-brr-data (thm (p (f1 a))))
        (cw-gstack-for-subterm* (f3 a))
        (cw-gstack-for-subterm* (f3 a))
        """
        _, out = run_session(script, CHAIN_RULES)
        assert "Attempting to apply (:REWRITE R1)" in out
        assert "No further rule applications found." in out


class TestRendering:
    def test_frame_count_equals_stack_length(self):
        session, _ = run_session(REVERSE_SCRIPT, REVERSE_RULES)
        res = run_query(session.brr_data_cache, QueryPattern(mk("(REV X)", {"X"})), "subterm")
        text = render_query_result(res)
        import re

        frames = re.findall(r"^(\d+)\. ", text, flags=re.M)
        assert len(frames) == len(res.stack) == 10

    def test_note_present_iff_descended(self):
        session, _ = run_session(REVERSE_SCRIPT, REVERSE_RULES)
        extended = run_query(session.brr_data_cache, QueryPattern(mk("(REV X)", {"X"})),
                             "subterm")
        assert "Note: The first lemma application above that provides a suitable result" \
            in render_query_result(extended)
        session2, _ = run_session(REVAPPEND_SCRIPT, REV_RULES)
        flat = run_query(session2.brr_data_cache, QueryPattern(mk("(REV X)", {"X"})), "subterm")
        assert "Note:" not in render_query_result(flat)

    def test_not_found_message(self):
        script = """
        (with-brr-data (thm (p (f1 a))))
        (cw-gstack-for-subterm (never-seen a))
        """
        _, out = run_session(script, CHAIN_RULES)
        assert "No rule application found that introduces (NEVER-SEEN A)." in out

    def test_rendering_includes_product_frame_and_result(self):
        _, out = run_session(REVAPPEND_SCRIPT, REV_RULES)
        assert "Attempting to apply (:REWRITE REVAPPEND-REMOVAL) to" in out
        assert "The resulting (translated) term is\n  (BINARY-APPEND (REV X) Y)." in out


class TestPatternParsing:
    def test_goal_vars_stay_literal(self):
        pat = parse_query_pattern(parse("(rev x)"), {"X"})
        assert pat.free_vars == frozenset()
        assert pat.term == mk("(REV X)", {"X"})

    def test_free_declares_instantiable_vars(self):
        pat = parse_query_pattern(parse("(:free (a) (rev a))"), {"X"})
        assert pat.free_vars == {"A"}

    def test_unknown_symbols_outside_free_are_constants(self):
        pat = parse_query_pattern(parse("(rev foo)"), {"X"})
        from brrkit.terms import Quote

        assert pat.term.args[0] == Quote("FOO")
