import subprocess
import sys

import pytest

from okn_mcp.cli import _registry_from_args, build_parser


def test_parser_defaults():
    args = build_parser().parse_args(["serve"])
    assert (args.transport, args.host, args.port, args.fixture) == ("stdio", "127.0.0.1", 8000, False)
    with pytest.raises(SystemExit):
        build_parser().parse_args(["serve", "--transport", "carrier-pigeon"])


def test_env_overrides():
    args = build_parser().parse_args(["serve"])
    reg = _registry_from_args(args, {
        "OKN_FEDERATION_ENDPOINT": "http://127.0.0.1:1/fed",
        "OKN_ONTOLOGY_ENDPOINT": "http://127.0.0.1:1/onto",
        "OKN_REQUEST_TIMEOUT": "5",
        "OKN_MAX_RETRIES": "0",
    })
    fed = reg.federation()
    assert fed.url == "http://127.0.0.1:1/fed" and fed.request_timeout == 5 and fed.max_retries == 0
    assert reg.ontology().url == "http://127.0.0.1:1/onto"


def test_no_env_keeps_bundled_endpoints():
    reg = _registry_from_args(build_parser().parse_args(["serve"]), {})
    assert reg.federation().url.startswith("https://frink.")


def test_help_runs():
    out = subprocess.run([sys.executable, "-m", "okn_mcp.cli", "--help"], capture_output=True, text=True, timeout=30)
    assert out.returncode == 0 and "fixture-endpoint" in out.stdout
