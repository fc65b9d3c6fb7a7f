"""Exception hierarchy; every error carries the CLI exit code it maps to."""


class PlacementError(Exception):
    exit_code = 1

    @property
    def kind(self) -> str:
        return type(self).__name__


class ParseError(PlacementError):
    exit_code = 2


class ValidationError(PlacementError):
    exit_code = 2


class DegenerateFootprint(ValidationError):
    pass


class ZeroDistance(ValidationError):
    pass


class CandidateCapExceeded(ValidationError):
    pass


class EmptyRegion(PlacementError):
    exit_code = 3


class EmptyCandidateSet(EmptyRegion):
    pass


class DemandExceedsTable(PlacementError):
    exit_code = 4


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_EMPTY_REGION = 3
EXIT_DEMAND_EXCEEDS_TABLE = 4
EXIT_IO = 5
