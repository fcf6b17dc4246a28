"""sqlxd: cross-dialect differential testing harness for SQL database systems.

Generates semantically equivalent query pairs for an emerging system (e.g.,
a time-series or streaming database) and a relational reference system,
executes both, and flags result discrepancies as logic bugs and unexpected
aborts as internal errors. Discrepancy-inducing cases are delta-debugged to
minimal repros and written as reproducible bug reports.
"""

__version__ = "0.1.0"
