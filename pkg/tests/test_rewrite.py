import pytest

from brrkit.rewrite import (
    BackchainLimit,
    Clause,
    FreeVarsNotFound,
    HypFailed,
    LoopStopper,
    RewriteContext,
    TypeAlist,
    clause_to_goal,
    clausify,
    decode_type_alist,
    ordinal,
    prove,
    relieve_hyps,
    render_gstack,
    rewrite,
    rewrite_lambda_object,
    simplify_clause,
    try_rules,
)
from brrkit.terms import Quote, Var, parse, print_term, to_term
from helpers import (
    CHAIN_RULES,
    PQR_RULES,
    PQR_RULES_WITH_Q2,
    REVERSE_RULES,
    build_world,
    mk,
)


def ctx_for(rules_text: str, **kw) -> RewriteContext:
    return RewriteContext(world=build_world(rules_text), **kw)


def ta_of(*pairs) -> TypeAlist:
    ta = TypeAlist()
    for term, truth in pairs:
        ta = ta.assume(term, truth)
    return ta


class TestClausify:
    def test_implies_and_flattening(self):
        cl = clausify(mk("(IMPLIES (AND (NATP N) (< N (LEN X))) (P N X))"))
        assert [print_term(l) for l in cl.literals] == [
            "(NOT (NATP N))", "(NOT (< N (LEN X)))", "(P N X)"]

    def test_double_negation_stripped(self):
        cl = clausify(mk("(IMPLIES (NOT (P X)) (Q X))"))
        assert [print_term(l) for l in cl.literals] == ["(P X)", "(Q X)"]

    def test_plain_goal_single_literal(self):
        assert clausify(Quote("T")) == Clause((Quote("T"),))

    def test_clause_to_goal_round_trip_display(self):
        cl = clausify(mk("(IMPLIES (R V) (P (F U V)))"))
        assert print_term(clause_to_goal(cl)) == "(IMPLIES (R V) (P (F U V)))"


class TestProve:
    def test_goal_proves_via_backchaining(self):
        outcome = prove(mk("(IMPLIES (R U) (P (F U V)))"), ctx_for(PQR_RULES))
        assert outcome.proved and outcome.checkpoints == ()

    def test_mismatched_variable_fails_with_checkpoint(self):
        outcome = prove(mk("(IMPLIES (R V) (P (F U V)))"), ctx_for(PQR_RULES))
        assert not outcome.proved
        assert len(outcome.checkpoints) == 1
        assert print_term(clause_to_goal(outcome.checkpoints[0])) == \
            "(IMPLIES (R V) (P (F U V)))"

    def test_trivial_true_goal(self):
        assert prove(Quote("T"), ctx_for("")).proved

    def test_trivial_clause_t(self):
        cl = Clause((Quote("T"),))
        _, proved = simplify_clause(cl, ctx_for(""))
        assert proved

    def test_literal_relieved_by_assumption(self):
        # ((NOT (R U)) (Q U)): literal 2's atom rewrites to 'T via q-rule1,
        # whose hypothesis (R U) is assumed true because literal 1 is false
        cl = Clause((mk("(NOT (R U))"), mk("(Q U)")))
        _, proved = simplify_clause(cl, ctx_for(PQR_RULES))
        assert proved

    def test_budget_exhaustion_is_an_event(self):
        runaway = """
        (defrule loop :class :rewrite :lhs (f x) :rhs (f (g x)))
        """
        ctx = ctx_for(runaway, step_budget=50)
        outcome = prove(mk("(P (F A))"), ctx)
        assert not outcome.proved
        assert any("budget" in e or "depth" in e for e in outcome.log)


class TestRewrite:
    def test_quote_rewrites_to_itself(self):
        ctx = ctx_for("")
        assert rewrite(Quote("NIL"), {}, TypeAlist(), (), (), ctx) == Quote("NIL")

    def test_definition_expansion_with_equality_replacement(self):
        ctx = ctx_for("""
        (alias append binary-append :arity 2 :assoc :right)
        (defrule binary-append :class :definition :lhs (binary-append x y)
          :rhs (if (consp x) (cons (car x) (binary-append (cdr x) y)) y))
        """)
        ta = ta_of((mk("(CONSP X)"), True),
                   (to_term(parse("(equal (binary-append (cdr x) y) (binary-append y (cdr x)))"),
                            None, ctx.world.aliases), True))
        res = rewrite(to_term(parse("(binary-append x y)"), None, ctx.world.aliases),
                      {}, ta, (), (), ctx)
        assert print_term(res) == "(CONS (CAR X) (BINARY-APPEND Y (CDR X)))"

    def test_revappend_chain_to_rev(self):
        ctx = ctx_for(REVERSE_RULES)
        res = rewrite(mk("(REVAPPEND X 'NIL)"), {}, TypeAlist(), (), (), ctx)
        assert print_term(res) == "(REV X)"

    def test_assumed_true_term_rewrites_to_t(self):
        ctx = ctx_for("")
        ta = ta_of((mk("(R V)"), True))
        assert rewrite(mk("(R V)"), {}, TypeAlist().assume(mk("(R V)"), True), (), (), ctx) \
            == Quote("T")
        assert rewrite(mk("(R V)"), {}, ta.assume(mk("(S V)"), False), (), (), ctx) == Quote("T")

    def test_assumed_false_term_rewrites_to_nil(self):
        ctx = ctx_for("")
        ta = ta_of((mk("(R V)"), False))
        assert rewrite(mk("(R V)"), {}, ta, (), (), ctx) == Quote("NIL")

    def test_if_collapses_on_constant_test(self):
        ctx = ctx_for("")
        assert rewrite(mk("(IF 'T A B)"), {}, TypeAlist(), (), (), ctx) == Var("A")
        assert rewrite(mk("(IF 'NIL A B)"), {}, TypeAlist(), (), (), ctx) == Var("B")

    def test_if_same_branches_collapse(self):
        ctx = ctx_for("")
        assert rewrite(mk("(IF (P X) A A)"), {}, TypeAlist(), (), (), ctx) == Var("A")

    def test_equal_reflexivity_folds(self):
        ctx = ctx_for("")
        assert rewrite(mk("(EQUAL (F X) (F X))"), {}, TypeAlist(), (), (), ctx) == Quote("T")
        assert rewrite(mk("(EQUAL 'A 'B)"), {}, TypeAlist(), (), (), ctx) == Quote("NIL")


class TestTryRules:
    def test_p_rule_application(self):
        ctx = ctx_for(PQR_RULES)
        ta = ta_of((mk("(R U)"), True))
        res = try_rules(mk("(P (F U V))"), ta, (), (), ctx)
        assert res == Quote("T")
        assert any(r.name == "P-RULE" for r in ctx.ttree)

    def test_failed_hyp_moves_to_next_rule(self):
        ctx = ctx_for(PQR_RULES_WITH_Q2)
        ta = ta_of((mk("(R U)"), True))
        # q-rule2 is tried first and fails on (S U); q-rule1 succeeds
        res = try_rules(mk("(Q U)"), ta, (), (), ctx)
        assert res == Quote("T")
        applied = {r.name for r in ctx.ttree}
        assert applied == {"Q-RULE1"}

    def test_permutative_loop_stopper_symmetric_instance(self):
        ctx = ctx_for("(defrule comm :class :rewrite :lhs (g x y) :rhs (g y x))")
        t = mk("(G A A)")
        assert try_rules(t, TypeAlist(), (), (), ctx) == t

    def test_permutative_sorts_arguments(self):
        ctx = ctx_for("(defrule comm :class :rewrite :lhs (g x y) :rhs (g y x))")
        assert print_term(rewrite(mk("(G B A)"), {}, TypeAlist(), (), (), ctx)) == "(G A B)"
        assert print_term(rewrite(mk("(G A B)"), {}, TypeAlist(), (), (), ctx)) == "(G A B)"

    def test_disabled_rule_never_tried(self):
        from brrkit.rules import set_enabled

        ctx = ctx_for(CHAIN_RULES)
        assert print_term(try_rules(mk("(F1 A)"), TypeAlist(), (), (), ctx)) == "(F3 A)"
        ctx2 = RewriteContext(world=set_enabled(ctx.world, "R1", False))
        t = mk("(F1 A)")
        assert try_rules(t, TypeAlist(), (), (), ctx2) == t


class TestRelieveHyps:
    def test_hyp_failure_reports_rewritten_instance(self):
        ctx = ctx_for(PQR_RULES)
        rule = ctx.world.find_rule("Q-RULE1")
        ta = ta_of((mk("(R V)"), True))
        res = relieve_hyps(rule, {"X": Var("U")}, ta, (), (), ctx)
        assert res == HypFailed(1, mk("(R U)"))
        assert res.describe() == ":HYP 1 rewrote to (R U)"

    def test_no_hyps_immediate_success(self):
        ctx = ctx_for(CHAIN_RULES)
        rule = ctx.world.find_rule("R1")
        assert relieve_hyps(rule, {"X": Var("A")}, TypeAlist(), (), (), ctx) == {"X": Var("A")}

    def test_free_var_first_match_from_type_alist(self):
        ctx = ctx_for("""
        (defrule free :class :rewrite :hyps ((r y)) :lhs (f x) :rhs 't)
        """)
        rule = ctx.world.find_rule("FREE")
        assert rule.free_vars == {"Y"}
        ta = ta_of((mk("(S B)"), True), (mk("(R A)"), True))
        res = relieve_hyps(rule, {"X": Var("U")}, ta, (), (), ctx)
        assert res["Y"] == Var("A")

    def test_free_var_not_found(self):
        ctx = ctx_for("""
        (defrule free :class :rewrite :hyps ((r y)) :lhs (f x) :rhs 't)
        """)
        rule = ctx.world.find_rule("FREE")
        res = relieve_hyps(rule, {"X": Var("U")}, TypeAlist(), (), (), ctx)
        assert res == FreeVarsNotFound(1)

    def test_backchain_limit(self):
        ctx = ctx_for(PQR_RULES, backchain_limit=0)
        rule = ctx.world.find_rule("Q-RULE1")
        res = relieve_hyps(rule, {"X": Var("U")}, TypeAlist(), (), (), ctx)
        assert res == BackchainLimit()


class TestLambdaRewriting:
    def test_atom_body_expands(self):
        ctx = ctx_for("(defrule atom :class :definition :lhs (atom x) :rhs (if (consp x) 'nil 't))")
        q = mk("'(LAMBDA (LOOP$-IVAR) (ATOM LOOP$-IVAR))")
        res = rewrite_lambda_object(q, ctx)
        assert print_term(res) == "'(LAMBDA (LOOP$-IVAR) (IF (CONSP LOOP$-IVAR) 'NIL 'T))"

    def test_normal_body_unchanged(self):
        ctx = ctx_for("")
        q = mk("'(LAMBDA (E) (CONSP E))")
        assert rewrite_lambda_object(q, ctx) == q

    def test_disabled_by_flag(self):
        ctx = ctx_for("(defrule atom :class :definition :lhs (atom x) :rhs (if (consp x) 'nil 't))",
                      lambda_rewrite=False)
        q = mk("'(LAMBDA (E) (ATOM E))")
        assert rewrite_lambda_object(q, ctx) == q

    def test_only_registered_slots_rewrite(self):
        rules = """
        (fn-slot always$ 1)
        (defrule atom :class :definition :lhs (atom x) :rhs (if (consp x) 'nil 't))
        """
        ctx = ctx_for(rules)
        inside = rewrite(mk("(ALWAYS$ '(LAMBDA (E) (ATOM E)) L)"), {}, TypeAlist(), (), (), ctx)
        assert "IF" in print_term(inside)
        outside = rewrite(mk("(OTHER '(LAMBDA (E) (ATOM E)) L)"), {}, TypeAlist(), (), (), ctx)
        assert print_term(outside) == "(OTHER '(LAMBDA (E) (ATOM E)) L)"


class TestRendering:
    def test_ordinals(self):
        assert [ordinal(i) for i in (1, 2, 3, 10, 11)] == \
            ["first", "second", "third", "tenth", "#11"]

    def test_type_alist_decode_groups(self):
        ta = ta_of((mk("(CONSP X)"), True),
                   (mk("(EQUAL (BINARY-APPEND (CDR X) Y) (BINARY-APPEND Y (CDR X)))"), True))
        out = decode_type_alist(ta)
        assert out.index("*TS-T*") < out.index("*TS-CONS*")
        assert "Terms with type *TS-CONS*:\nX" in out

    def test_type_alist_decode_non_nil(self):
        out = decode_type_alist(ta_of((mk("(R V)"), True)))
        assert "Terms with type (TS-COMPLEMENT *TS-NIL*):\n(R V)" in out

    def test_gstack_rendering_matches_shape(self):
        ctx = ctx_for(REVERSE_RULES)
        captured = {}

        class Spy:
            def brkpt1(self, rule, target, unify, ta, anc, gs, c):
                if rule.rune.name == "REVAPPEND-REMOVAL":
                    captured["gs"] = gs

            def brkpt2(self, *a, **k):
                pass

            def near_miss_brkpt1(self, *a, **k):
                pass

        ctx.session = Spy()
        prove(mk("(EQUAL (NTH N (REVERSE X)) (FOO N X))"), ctx)
        out = render_gstack(captured["gs"])
        assert "1. Simplifying the clause" in out
        assert "Rewriting (to simplify) the atom of the first literal," in out
        assert "under the substitution\n     X : X" in out
        assert out.rstrip().endswith("(REVAPPEND X 'NIL)")
