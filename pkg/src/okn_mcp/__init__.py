"""MCP server for discovering, inspecting and querying a federation of named
knowledge graphs, with ontology-descendant query expansion."""

__version__ = "0.1.0"
