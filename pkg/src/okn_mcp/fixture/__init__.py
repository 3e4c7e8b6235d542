from .evaluator import evaluate
from .federation import FixtureFederation, start_fixture_federation
from .http import FixtureEndpoint
from .store import TripleStore, parse_ntriples

__all__ = ["FixtureEndpoint", "FixtureFederation", "TripleStore", "evaluate", "parse_ntriples", "start_fixture_federation"]
