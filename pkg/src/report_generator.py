"""
Results Writer for Bound and Decoding Experiments

Writes result tables as CSV / JSON / JSON-lines and records every run in a
JSON manifest (command, resolved configuration, seed, toolkit version,
timestamps and SHA-256 digests of the data files).

Data files are written with a fixed float format and '\n' line endings so
that re-running a manifest's configuration reproduces them byte for byte.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Optional

import pandas as pd

from .utils import TOOLKIT_VERSION, report

FLOAT_FORMAT = '%.12g'
MANIFEST_NAME = 'manifest.json'


def file_digest(path):
    """SHA-256 hex digest of a file's bytes."""
    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            sha.update(chunk)
    return sha.hexdigest()


def utc_timestamp():
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


@dataclass
class RunManifest:
    """Record of one command invocation and the data files it produced."""
    command: str
    config: dict
    seed: Optional[int]
    version: str = TOOLKIT_VERSION
    started: str = ''
    finished: str = ''
    outputs: Dict[str, str] = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def save(self, path):
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')
        return str(path)

    @classmethod
    def load(cls, path):
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        missing = {'command', 'config'} - set(data)
        if missing:
            raise ValueError(f"manifest {path} lacks fields {sorted(missing)}")
        return cls(
            command=data['command'],
            config=data['config'],
            seed=data.get('seed'),
            version=data.get('version', TOOLKIT_VERSION),
            started=data.get('started', ''),
            finished=data.get('finished', ''),
            outputs=dict(data.get('outputs', {})),
        )


class ResultsWriter:
    """
    Writes the data files of one run into an output directory and keeps
    track of them for the manifest.

    Parameters:
    -----------
    output_dir : str or Path
        Directory for the run's files (created if missing)
    verbose : bool
        Print a line per written file
    """

    def __init__(self, output_dir='output', verbose=True):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.verbose = verbose
        self.written = []
        self.started = utc_timestamp()

    def _path(self, name):
        path = self.output_dir / name
        self.written.append(path)
        return path

    def write_csv(self, df: pd.DataFrame, name):
        path = self._path(name)
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        report(f"✓ CSV saved: {path}", self.verbose)
        return str(path)

    def write_json(self, data, name):
        path = self._path(name)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write('\n')
        report(f"✓ JSON saved: {path}", self.verbose)
        return str(path)

    def write_jsonl(self, df: pd.DataFrame, name):
        """One JSON object per DataFrame row."""
        path = self._path(name)
        df.to_json(path, orient='records', lines=True, double_precision=12)
        report(f"✓ JSON-lines saved: {path}", self.verbose)
        return str(path)

    def write_table(self, df: pd.DataFrame, stem, fmt='csv'):
        """
        Write a table as CSV, JSON (list of records) or both.

        Returns:
        --------
        list of str
            Paths written
        """
        if fmt not in ('csv', 'json', 'both'):
            raise ValueError(f"format must be 'csv', 'json' or 'both', got '{fmt}'")
        paths = []
        if fmt in ('csv', 'both'):
            paths.append(self.write_csv(df, f"{stem}.csv"))
        if fmt in ('json', 'both'):
            records = json.loads(df.to_json(orient='records', double_precision=12))
            paths.append(self.write_json(records, f"{stem}.json"))
        return paths

    def register(self, path):
        """Track a file written by someone else (figures) for the manifest."""
        self.written.append(Path(path))
        return str(path)

    def digests(self):
        return {path.name: file_digest(path) for path in sorted(set(self.written))}

    def write_manifest(self, command, config, seed=None):
        """Finish the run: digest every data file and write manifest.json next to them."""
        manifest = RunManifest(
            command=command,
            config=config,
            seed=seed,
            started=self.started,
            finished=utc_timestamp(),
            outputs=self.digests(),
        )
        path = manifest.save(self.output_dir / MANIFEST_NAME)
        report(f"✓ Manifest saved: {path} ({len(manifest.outputs)} data files)", self.verbose)
        return manifest
