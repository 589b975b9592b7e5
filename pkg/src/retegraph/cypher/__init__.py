from .parser import parse_query
from .validator import ValidatedQuery, validate

__all__ = ["parse_query", "validate", "ValidatedQuery"]
