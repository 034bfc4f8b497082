"""clls: interpreter, linear type checker and REPL for a session-typed language.

The package is organised as a classic front end / middle / back end split:

- `lexer`, `parser`, `desugar`: source text to core process terms
- `sessiontypes`: the session type algebra (duality, unfolding, equality)
- `checker`: linear type checking, cell protocols, guardedness
- `runtime`: cooperative scheduler, rendezvous channels, reference cells
- `cli`, `repl`: command line driver and interactive top level
"""

from clls.diagnostics import Diagnostic, Span
from clls.program import Program

__version__ = "0.1.0"

__all__ = ["Diagnostic", "Span", "Program", "__version__"]
