"""Exception types shared across the harness."""


class SqlxdError(Exception):
    """Base class for all harness errors."""


class SqlSyntaxError(SqlxdError):
    """Raised by the parser for text outside the supported grammar subset."""

    def __init__(self, message, position, text=""):
        self.position = position
        self.text = text
        super().__init__(f"{message} (at offset {position})")


class UnsupportedConstruct(SqlxdError):
    """A dialect-only AST node was rendered for a dialect that lacks it."""

    def __init__(self, dialect_name, node_kind):
        self.dialect_name = dialect_name
        self.node_kind = node_kind
        super().__init__(f"{node_kind} cannot be rendered for dialect {dialect_name!r}")


class UnmappableConstruct(SqlxdError):
    """A dialect-only node survived mapping with no rule able to rewrite it."""

    def __init__(self, node_kind, detail=""):
        self.node_kind = node_kind
        msg = f"no mapping rule applies to {node_kind}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class UnsupportedExpr(SqlxdError):
    """The scalar mini-evaluator was given a node outside its subset."""


class ConnectionLost(SqlxdError):
    """Transport-level failure, retryable; distinct from an error outcome."""


class BudgetExceeded(SqlxdError):
    """Reduction ran out of predicate invocations; carries the best case so far."""

    def __init__(self, best):
        self.best = best
        super().__init__("reduction budget exceeded")


class FlakyPredicate(SqlxdError):
    """The reduction predicate changed its answer on an identical input."""


class CampaignError(SqlxdError):
    """Operational campaign failure (bad config, unreachable endpoint)."""
