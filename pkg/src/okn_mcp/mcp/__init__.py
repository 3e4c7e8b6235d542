from .server import PROTOCOL_VERSION, McpServer
from .tools import CATALOG, TOOL_NAMES, Services, ToolDefinition
from .transports import McpHttpServer, serve_stdio

__all__ = [
    "CATALOG",
    "PROTOCOL_VERSION",
    "McpHttpServer",
    "McpServer",
    "Services",
    "TOOL_NAMES",
    "ToolDefinition",
    "serve_stdio",
]
