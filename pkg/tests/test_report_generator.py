import hashlib
import json

import pandas as pd
import pytest

from src.report_generator import MANIFEST_NAME, ResultsWriter, RunManifest, file_digest


@pytest.fixture
def table():
    return pd.DataFrame({'t_u': [0, 1], 'p': [0.1, 1 / 3]})


def test_csv_uses_fixed_float_format(tmp_path, table):
    writer = ResultsWriter(tmp_path, verbose=False)
    writer.write_csv(table, 'table.csv')
    assert (tmp_path / 'table.csv').read_bytes() == b't_u,p\n0,0.1\n1,0.333333333333\n'


def test_write_table_formats(tmp_path, table):
    writer = ResultsWriter(tmp_path, verbose=False)
    paths = writer.write_table(table, 'table', 'both')
    assert [p.split('/')[-1] for p in paths] == ['table.csv', 'table.json']
    records = json.loads((tmp_path / 'table.json').read_text())
    assert records[0] == {'p': 0.1, 't_u': 0}
    with pytest.raises(ValueError):
        writer.write_table(table, 'table', 'xlsx')


def test_jsonl_one_object_per_row(tmp_path, table):
    writer = ResultsWriter(tmp_path, verbose=False)
    writer.write_jsonl(table, 'rows.jsonl')
    lines = (tmp_path / 'rows.jsonl').read_text().splitlines()
    assert [json.loads(line)['t_u'] for line in lines] == [0, 1]


def test_digest_matches_hashlib(tmp_path):
    path = tmp_path / 'blob.bin'
    path.write_bytes(b'located')
    assert file_digest(path) == hashlib.sha256(b'located').hexdigest()


def test_manifest_lists_every_written_file(tmp_path, table):
    writer = ResultsWriter(tmp_path, verbose=False)
    writer.write_csv(table, 'a.csv')
    writer.write_json({'x': 1}, 'b.json')
    manifest = writer.write_manifest('scatter', {'L': 1, 'trials': 10}, seed=7)
    assert set(manifest.outputs) == {'a.csv', 'b.json'}
    assert manifest.outputs['a.csv'] == file_digest(tmp_path / 'a.csv')

    loaded = RunManifest.load(tmp_path / MANIFEST_NAME)
    assert loaded.command == 'scatter'
    assert loaded.config == {'L': 1, 'trials': 10}
    assert loaded.seed == 7
    assert loaded.started and loaded.finished
    assert loaded.outputs == manifest.outputs


def test_manifest_requires_command_and_config(tmp_path):
    path = tmp_path / MANIFEST_NAME
    path.write_text(json.dumps({'seed': 1}))
    with pytest.raises(ValueError, match='lacks fields'):
        RunManifest.load(path)
