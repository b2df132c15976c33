import json
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
from loguru import logger
from pydantic import BaseModel

from sturmian_targets.api.schemas import RunConfig
from sturmian_targets.config.settings import settings
from sturmian_targets.models.errors import ConfigError


def to_jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    return value


def _as_text(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _as_text(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return ";".join(str(_as_text(item)) for item in value)
    return "" if value is None else str(value)


class Exporter:
    """Renders run results as CSV, JSON or two-column plot data; timestamps only go to the sidecar."""

    def table(self, rows: List[Dict[str, Any]], config: RunConfig) -> str:
        ### leaves become strings before pandas sees them, so big and optional integers stay exact
        frame = pd.json_normalize([_as_text(row) for row in rows], sep="_") if rows else pd.DataFrame()
        body = frame.to_csv(index=False, lineterminator="\n")
        return f"# config: {config.canonical()}\n{body}"

    def document(self, result: Any, config: RunConfig) -> str:
        payload = {"config": config.canonical(), "result": to_jsonable(result)}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def plot_data(self, points: Iterable[Tuple[Any, Any]], columns: Sequence[str], config: RunConfig) -> str:
        lines = [f"# config: {config.canonical()}", f"# {columns[0]} {columns[1]}"]
        lines += [f"{x} {y}" for x, y in points if y is not None]
        return "\n".join(lines) + "\n"

    def resolve(self, output: Optional[str]) -> Optional[Path]:
        """Relative output paths land under settings.output_dir."""
        if not output:
            return None
        path = Path(output)
        return path if path.is_absolute() else Path(settings.output_dir) / path

    def emit(self, text: str, output: Optional[str], config: RunConfig, elapsed: float = 0.0) -> Optional[Path]:
        path = self.resolve(output)
        if path is None:
            sys.stdout.write(text)
            return None
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8", newline="\n")
            meta = {
                "config": config.canonical(),
                "written_at": datetime.now().isoformat(),
                "elapsed_seconds": round(elapsed, 3),
            }
            path.with_name(path.name + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            logger.error(f"export error for {path}: {e}")
            raise ConfigError(f"cannot write {path}: {e}") from e
        logger.info(f"wrote {path}")
        return path


exporter = Exporter()
