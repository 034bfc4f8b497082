"""The negative checker suite: programs that must be rejected, each with
the rule its diagnostic names."""

NEGATIVE_PROGRAMS = [
    ("linear-reuse", """
proc p(x:wait){ wait x; wait x; [] };;
""", "linearity-reuse"),

    ("linear-leak", """
proc p(x:close){ [] };;
""", "leak"),

    ("missing-cell-drop", """
type C { state lint };;
proc p(u:~C){ take u(x); put u(x); [] };;
""", "leak"),

    ("take-take", """
type C { state lint };;
proc p(u:~C){ take u(x); take u(y); put u(x); put u(y); drop u };;
""", "cell-protocol"),

    ("drop-while-held", """
type C { state lint };;
proc p(u:~C){ take u(x); drop u };;
""", "cell-protocol"),

    ("share-two-names", """
type C { state lint };;
proc p(u:~C, v:~C){ share u { drop u; drop v || drop u; drop v } };;
""", "share-arity"),

    ("cut-two-shared", """
proc p(y:wait){ cut { wait y; close x |x:wait| wait x; wait y; [] } };;
""", "cut-arity"),

    ("par-one-shared", """
proc p(x:close){ par { close x || close x } };;
""", "par-shared"),

    ("affine-promotion-nondisposable", """
proc p(a:affine close, y:close){ affine a; par { close a || close y } };;
""", "affine-promotion"),

    ("bang-linear-capture", """
proc p(s:!close, y:wait){ !s(m); close m };;
""", "promotion"),

    ("case-missing-branch", """
type T2 { offer of { | #A: close | #B: close } };;
proc p(x:T2){ case x of { | #A: close x } };;
""", "case-branches"),

    ("unguarded-rec", """
proc rec loop(x:wait){ loop(x) };;
""", "unguarded-recursion"),

    ("cell-content-mismatch", """
proc p(y:close){ letc m:state wait { cell m(y) }; drop m };;
""", "cell-content"),

    ("unknown-label", """
type T2 { offer of { | #A: close | #B: close } };;
proc p(x:~T2){ #C x; close x };;
""", "label"),

    ("fwd-non-dual", """
proc p(x:close, y:close){ fwd x y };;
""", "type-mismatch"),

    ("close-residue", """
proc p(x:close, y:close){ close x };;
""", "leak"),

    ("call-arity", """
proc q(x:close){ close x };;
proc p(x:close, y:close){ q(x, y) };;
""", "call-arity"),

    ("rec-without-flag", """
proc p(;n:~lint){ p(;n) };;
""", "unguarded-recursion"),
]
