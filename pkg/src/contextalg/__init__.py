"""Context algebras: logical forms as projections, words as context vectors."""

__version__ = "0.1.0"

from .context_algebra import (
    AlgebraElement,
    Basis,
    CoefficientSpace,
    Context,
    ContextFunction,
    GeneralLanguage,
    SCALAR,
    cf_join,
    cf_leq,
    cf_meet,
    context_vector,
    enumerate_nonzero_strings,
    expand_in_basis,
    multiply,
    string_basis,
)
from .entailment import DegreeResult, Distribution, degree_exact, degree_mc, phi
from .logic import (
    BOT,
    TOP,
    And,
    Atom,
    Bot,
    Formula,
    Not,
    Or,
    Top,
    Universe,
    close_universe,
    down_set,
    entails,
    equivalent,
    parse_formula,
)
from .projections import (
    DiagOperator,
    IdentityReport,
    check_identities,
    op_add,
    op_compose,
    op_join,
    op_leq,
    op_meet,
    op_scale,
    op_sub,
    projection_of,
)
from .semantics import (
    GammaSpec,
    Interpretation,
    Lexicon,
    build_aspect_language,
    build_gamma_language,
    sentence_operator,
    sentence_vector,
    word_vector,
)
