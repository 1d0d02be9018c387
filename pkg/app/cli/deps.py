"""Shared dependencies of the subcommands: config loading, run directory, exit codes"""

import sys
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from ..core.config import settings
from ..core.errors import ConfigurationError
from ..core.models import RunConfig
from ..core.storage import RunStorage

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def format_validation_error(error: ValidationError) -> str:
    """One `loc: msg` line per failing field"""
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{loc}: {item['msg']}")
    return "invalid run configuration:\n" + "\n".join(lines)


def load_config(path: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Validated RunConfig from a JSON file (built-in defaults when no file is given)"""
    try:
        if path is None:
            data: Dict[str, Any] = {}
        else:
            config_path = Path(path)
            if not config_path.exists():
                raise ConfigurationError(f"config file not found: {path}")
            data = RunConfig.model_validate_json(config_path.read_text(encoding="utf-8")).model_dump()
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        return RunConfig.model_validate({**data, **overrides})
    except ValidationError as e:
        raise ConfigurationError(format_validation_error(e)) from None


def get_storage(cfg: RunConfig, output: Optional[str] = None) -> RunStorage:
    return RunStorage(output or cfg.output_dir or settings.output_dir)


def resolve_jobs(cli_jobs: Optional[int], cfg: RunConfig) -> int:
    return max(1, cli_jobs or cfg.jobs or settings.jobs)


def finish(result: Dict[str, Any]) -> int:
    """Print a service result and map it to an exit status"""
    if result["success"]:
        if result.get("message"):
            print(f"✅ {result['message']}")
        for path in result.get("files", []):
            print(f"📄 {path}")
        return EXIT_OK
    print(f"❌ {result['error']}", file=sys.stderr)
    return EXIT_USAGE if result.get("error_type") == "usage" else EXIT_RUNTIME
