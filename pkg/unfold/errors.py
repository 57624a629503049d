# SPDX-License-Identifier: AGPL-3.0-only
class UnfoldError(RuntimeError):
    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class SelfLoop(UnfoldError):
    code = "self-loop"


class DuplicateEdge(UnfoldError):
    code = "duplicate-edge"


class NodeOutOfRange(UnfoldError):
    code = "node-out-of-range"


class EdgeNotFound(UnfoldError):
    code = "edge-not-found"


class InvalidSize(UnfoldError):
    code = "invalid-size"


class NotEnoughPairs(UnfoldError):
    code = "not-enough-pairs"


class DegenerateInput(UnfoldError):
    code = "degenerate-input"


class ParseError(UnfoldError):
    code = "parse-error"

    def __init__(self, message, lineno=None, filename=None):
        where = ""
        if filename is not None:
            where += f"{filename}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
        self.lineno = lineno
        self.filename = filename


class InvariantViolation(UnfoldError):
    code = "invariant-violation"


class TooFewPoints(UnfoldError):
    code = "too-few-points"


class DimensionMismatch(UnfoldError):
    code = "dimension-mismatch"


class EmptyFootprint(UnfoldError):
    code = "empty-footprint"


class NoAugEdges(UnfoldError):
    code = "no-aug-edges"


class NumericalDivergence(UnfoldError):
    code = "numerical-divergence"


class DegenerateGeometry(UnfoldError):
    code = "degenerate-geometry"


class NoIncidentPairs(UnfoldError):
    code = "no-incident-pairs"


class DegenerateLayout(UnfoldError):
    code = "degenerate-layout"


class AllZeroDifferences(UnfoldError):
    code = "all-zero-differences"


class EmptyInput(UnfoldError):
    code = "empty-input"


class MissingLayout(UnfoldError):
    code = "missing-layout"


class IncompleteRecords(UnfoldError):
    code = "incomplete-records"


class MismatchedFiles(UnfoldError):
    code = "mismatched-files"
