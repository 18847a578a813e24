"""Fixture corpus: programs with pinned expected outcomes.

The p_* fixtures encode the worked dispatch examples and the two swappable
counterexamples; the c_* fixtures are constructed accepted programs and the
r_* fixtures constructed rejections.  Together they cover every reduction
and typing rule at least once:

    rule            exercised by
    --------------  ------------------------------------------------------
    R-Field         c02 c06 c15 c17 c19
    R-Invk          every program with a call
    R-InvkB         c03 c04 c15 p_lookup1b p_lookup2
    R-InvkP         c05 c09 p_lookup1 p_lookup2 p_game
    R-InvkSP        c10 c13 c19 p_lookup2
    RC-With(+Arg)   c05 (c06 c13 c19 for the arg position), R-WithVal ditto
    RC-Swap(+Arg)   c07 c18 c20 (c08 for the arg position), R-SwapVal ditto
    RC-Field        c02
    RC-InvkRecv     c17
    RC-InvkArg      c17
    RC-New          c17
    RC-InvkAArg1/2  c10 (computed proceed / superproceed arguments)
    T-Var/T-Field   c02 c03 r11
    T-Invk          everywhere; r13 rejects a layer receiver
    T-New/T-NewL    c02 and every layer program
    T-With          c05..c14; r02 rejects an unmet requires
    T-Swap          c07 c08 c18 c20; r10 rejects a non-swappable target
    T-SuperB        c04; r12 rejects super at top level
    T-SuperP        p_lookup2 p_cex2
    T-Proceed       c05 c09 c11 c20; r01 rejects a dangling proceed
    T-SuperProceed  c10 c13 c19; r09 rejects an empty parent chain
    T-Method        every class; r08 rejects a bad return
    T-PMethod       every layer fixture
    T-Layer         every layer fixture (requires covariance: p_game)
    T-LayerSW       c07 c18 c20; rejections p_cex1 p_cex2 r06 r07
    T-Table         noconflict r03, override-h r04, override-v r05
    T-InvkA/T-InvkAL  runtime re-typing of every accepted trace
    Wf-Empty/With/Swap, NDP-*  cursor checks along every accepted trace

Expected values marked here were derived by hand-running the lookup and
reduction rules on the fixture tables; the golden trace files freeze the
full runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional


@dataclass(frozen=True)
class Fixture:
    id: str
    filename: str
    expect_type: Optional[str] = None     # rendered main type when accepted
    expect_result: Optional[str] = None   # rendered final value (None: skip)
    golden: Optional[str] = None          # golden trace file under golden/
    reject_rule: Optional[str] = None     # rule cited when rejected
    reject_premise: Optional[str] = None  # premise cited when rejected
    stuck_within: Optional[int] = None    # unchecked evaluation stuck bound
    stuck_state: Optional[str] = None     # substring of a trace expression
    diverges: bool = False

    @property
    def accepted(self) -> bool:
        return self.reject_rule is None


FIXTURES = [
    Fixture("p_lookup1", "p_lookup1.cfj", "W", "new W3C()", golden="p_lookup1.trace"),
    Fixture("p_lookup1b", "p_lookup1b.cfj", "W", "new W1D()", golden="p_lookup1b.trace"),
    Fixture("p_lookup2", "p_lookup2.cfj", "Unit", "new Unit()", golden="p_lookup2.trace"),
    Fixture("p_game", "p_game.cfj", "Text", "new Text()", golden="p_game.trace"),
    Fixture("p_cex1", "p_cex1.cfj", reject_rule="T-LayerSW",
            reject_premise="requires-equality", stuck_within=10,
            stuck_state="new C()<C,•,(L;L2)>.m()"),
    Fixture("p_cex2", "p_cex2.cfj", reject_rule="T-LayerSW",
            reject_premise="no-new-partial-method", stuck_within=10,
            stuck_state="swap (new L1(), L0) { new D().m() }"),
    Fixture("c01_min", "c01_min.cfj", "Object", "new Object()"),
    Fixture("c02_fields", "c02_fields.cfj", "Object", "new Object()"),
    Fixture("c03_base_invoke", "c03_base_invoke.cfj", "A", "new B()"),
    Fixture("c04_super_base", "c04_super_base.cfj", "A", "new B()"),
    Fixture("c05_with_basic", "c05_with_basic.cfj", "A", "new A()"),
    Fixture("c06_with_arg_field", "c06_with_arg_field.cfj", "A", "new A()"),
    Fixture("c07_swap", "c07_swap.cfj", "A", "new A()"),
    Fixture("c08_swap_arg_method", "c08_swap_arg_method.cfj", "A", "new A()"),
    Fixture("c09_proceed_chain", "c09_proceed_chain.cfj", "A", "new A()"),
    Fixture("c10_superproceed", "c10_superproceed.cfj", "A", "new A()"),
    Fixture("c11_baseless_requires", "c11_baseless_requires.cfj", "A", "new A()"),
    Fixture("c12_weak_requires", "c12_weak_requires.cfj", "A", "new A()"),
    Fixture("c13_firstclass_normal", "c13_firstclass_normal.cfj", "A", "new A()"),
    Fixture("c14_reactivation", "c14_reactivation.cfj", "A", "new A()"),
    Fixture("c15_deep_chain", "c15_deep_chain.cfj", "Object", "new Object()"),
    Fixture("c16_diverge", "c16_diverge.cfj", "R", None, diverges=True),
    Fixture("c17_pair_args", "c17_pair_args.cfj", "U", "new U()"),
    Fixture("c18_swap_in_with", "c18_swap_in_with.cfj", "A", "new A()"),
    Fixture("c19_layer_field_store", "c19_layer_field_store.cfj", "A", "new A()"),
    Fixture("c20_swap_requires", "c20_swap_requires.cfj", "A", "new A()"),
    Fixture("r01_proceed_dangling", "r01_proceed_dangling.cfj", reject_rule="T-Proceed"),
    Fixture("r02_with_unmet", "r02_with_unmet.cfj", reject_rule="T-With",
            reject_premise="requires-active"),
    Fixture("r03_conflict", "r03_conflict.cfj", reject_rule="T-Table",
            reject_premise="noconflict"),
    Fixture("r04_override_h", "r04_override_h.cfj", reject_rule="T-Table",
            reject_premise="override-h"),
    Fixture("r05_override_v", "r05_override_v.cfj", reject_rule="T-Table",
            reject_premise="override-v"),
    Fixture("r06_swap_req", "r06_swap_req.cfj", reject_rule="T-LayerSW",
            reject_premise="not-required-by-others"),
    Fixture("r07_swap_swap", "r07_swap_swap.cfj", reject_rule="T-LayerSW",
            reject_premise="swappable-under-swappable"),
    Fixture("r08_return_type", "r08_return_type.cfj", reject_rule="T-Method"),
    Fixture("r09_superproceed_base", "r09_superproceed_base.cfj",
            reject_rule="T-SuperProceed"),
    Fixture("r10_swap_not_swappable", "r10_swap_not_swappable.cfj",
            reject_rule="T-Swap", reject_premise="swappable"),
    Fixture("r11_unknown_field", "r11_unknown_field.cfj", reject_rule="T-Field"),
    Fixture("r12_super_top", "r12_super_top.cfj", reject_rule="T-SuperB"),
    Fixture("r13_invoke_layer", "r13_invoke_layer.cfj", reject_rule="T-Invk"),
]

BY_ID = {f.id: f for f in FIXTURES}
ACCEPTED = [f for f in FIXTURES if f.accepted]
REJECTED = [f for f in FIXTURES if not f.accepted]


def fixture_source(filename: str) -> str:
    return resources.files(__name__).joinpath(filename).read_text(encoding="utf-8")


def golden_source(filename: str) -> str:
    return resources.files(__name__).joinpath("golden", filename).read_text(encoding="utf-8")


def load(fixture_id: str):
    """Parse a fixture by id into a Program."""
    from ..parser import parse_program
    f = BY_ID[fixture_id]
    return parse_program(fixture_source(f.filename), f.filename)
