"""regraft: an in-place typed-graph rewriting engine.

Rules rewrite typed attributed graphs; transformation units compose rules
with transactional control flow.  The package ships a complete
reverse-engineering pipeline (restricted Java sources to state machines),
an HTTP service, and a command-line client.
"""

__version__ = "0.1.0"
