"""Run manifests: one JSON file per output directory, one entry per command"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

from utils.constants import APP_NAME, APP_VERSION
from utils.helpers import file_digest, read_json, write_json
from utils.logger import setup_logger

logger = setup_logger(__name__)

MANIFEST_NAME = 'manifest.json'


class RunManifest:
    """Inputs with digests, parameters, outputs, timing and diagnostics of one command"""

    def __init__(self, command: str):
        self.command = command
        self.inputs: list = []
        self.parameters: dict = {}
        self.outputs: list = []
        self.timing_s: Dict[str, float] = {}
        self.diagnostics: dict = {}

    def add_inputs(self, paths: Iterable[Union[str, Path]]):
        for path in paths:
            self.inputs.append({'path': str(path), 'sha256': file_digest(Path(path))})

    def add_outputs(self, paths: Iterable[Union[str, Path]]):
        self.outputs.extend(str(p) for p in paths)

    def as_dict(self) -> dict:
        return {
            'tool': {'name': APP_NAME, 'version': APP_VERSION},
            'command': self.command,
            'inputs': self.inputs,
            'parameters': self.parameters,
            'outputs': self.outputs,
            'timing': {
                'finished_at': datetime.now(timezone.utc).isoformat(timespec='seconds'),
                'elapsed_s': self.timing_s,
            },
            'diagnostics': self.diagnostics,
        }

    def write(self, out_dir: Union[str, Path], manifest_path: Optional[Path] = None) -> Path:
        """Merge this entry into ``out_dir/manifest.json`` under the command name"""
        path = Path(manifest_path) if manifest_path else Path(out_dir) / MANIFEST_NAME
        document = {'commands': {}}
        if path.exists():
            try:
                document = read_json(path)
                document.setdefault('commands', {})
            except ValueError:
                logger.warning(f"Existing manifest {path} is not valid JSON; replacing it")
                document = {'commands': {}}
        document['commands'][self.command] = self.as_dict()
        write_json(path, document)
        logger.debug(f"Manifest updated: {path} [{self.command}]")
        return path
