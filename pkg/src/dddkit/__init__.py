"""dddkit: a tactical domain-driven design modeling toolchain.

Textual DSL for domain models, a rule-based verifier with suggested repairs,
a deterministic Java generator with protected user-code regions, a delta
engine for model evolution, and a mirror that reads generated code back for
consistency checking.
"""

__version__ = "0.1.0"
