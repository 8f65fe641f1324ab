"""
Errors - Exception hierarchy shared by all spread modules
The launcher maps these to exit codes (1 validation, 2 guard refusal)
"""


class SpreadError(Exception):
    """Base class for every error raised by the spread library"""

    exit_code = 1


class GraphFormatError(SpreadError):
    """Malformed graph file content"""

    def __init__(self, message: str, line_number: int = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class SeedError(SpreadError):
    """Empty seed set or seed label not present in the graph"""


class DecompositionError(SpreadError):
    """Path decomposition does not cover the graph"""


class OrderingError(SpreadError):
    """Explicit edge order is not a permutation of the edges"""


class DiagramInvariantError(SpreadError):
    """Internal consistency violation inside a diagram or DP table"""


class WidthGuardError(SpreadError):
    """Frontier width above the configured maximum"""

    exit_code = 2

    def __init__(self, omega: int, max_width: int):
        self.omega = omega
        self.max_width = max_width
        super().__init__(
            f"frontier width {omega} exceeds the configured maximum {max_width}; "
            f"state counts grow like 2^(w^2) = 2^{omega * omega}. "
            f"Supply a better --pathdec/--order or raise --max-width"
        )


class OracleGuardError(SpreadError):
    """Exhaustive enumeration refused because there are too many free edges"""

    exit_code = 2

    def __init__(self, free_edges: int, max_edges: int):
        self.free_edges = free_edges
        self.max_edges = max_edges
        super().__init__(
            f"refusing to enumerate 2^{free_edges} edge subsets "
            f"(limit is 2^{max_edges}); use 'mc' for an estimate"
        )
