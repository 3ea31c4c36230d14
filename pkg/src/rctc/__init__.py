"""A workbench for a reversible, truly concurrent process calculus with
communication keys: parsing, forward/reverse step semantics, bounded
exploration, equivalence checking, and an algebraic-law test harness."""

from .term import (
    TAU,
    Const,
    Nil,
    NIL,
    Par,
    Prefix,
    Process,
    Relabel,
    Restrict,
    Seq,
    Sort,
    Sum,
    TermError,
    UnresolvedConstantError,
    apply_relabel,
    complement,
    is_fully_executed,
    is_standard,
    keys,
    max_key,
    sort,
)
from .syntax import ParseError, parse, parse_defs, render
from .sos import (
    FORWARD,
    REVERSE,
    StepLabel,
    Transition,
    forward_single,
    forward_steps,
    reverse_single,
    reverse_steps,
    weak_forward_steps,
    weak_reverse_steps,
)
from .lts import (
    Bounds,
    EventRecord,
    KeyedLts,
    Pomset,
    PomsetRun,
    explore,
    export,
    import_lts,
    pomset_isomorphic,
    pomset_runs,
    reverse_runs,
    structural_history,
)
from .equiv import Flavor, Strength, Verdict, Witness, check
from .laws import (
    CaseResult,
    GenConfig,
    LawCase,
    Report,
    all_laws,
    check_congruence,
    run_law_case,
    run_law_suite,
)

__all__ = [name for name in dir() if not name.startswith("_")]
