from linlog.lll.types import (
    LType, Real, One, Top, Tensor, With, Lolli, Bang,
    affine, is_tensor_seq, is_with_seq, is_ground, workload_type, with_tuple_type,
)
from linlog.lll.terms import (
    Pattern, PVar, PBang, PUnit, PTensor, PWith,
    Term, Var, Numeral, PrimFn, PlusDot, TimesDot, Zero, Abs, App,
    UnitVal, TensorPair, BangVal, TopVal, WithPair,
    para, para_pattern, let_, bang_let, free_vars, pattern_vars, pattern_type,
    with_tuple, with_pattern, prim_app, pattern_var_types, alpha_eq, term_size,
)
from linlog.lll.prims import PrimId, REGISTRY, prim, partial_of
from linlog.lll.typecheck import (
    TypingEnv, typecheck, LinError, UnboundVariable, LinearityViolation,
    PromotionViolation, TypeMismatch, PatternShapeMismatch,
)
from linlog.lll.reduce import (
    ReductionOutcome, substitute, value_for_pattern, beta_step, normalize,
    safe_reduce, is_strong_value, is_progress_normal_form, simplify,
    BudgetExhausted, StuckOpenTerm, NotAValueForPattern,
)
from linlog.lll.workload import workload_term, is_safe
from linlog.lll.sorts import Sort, classify_sort
