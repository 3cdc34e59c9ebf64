"""
Result files carrying their provenance.

Every artifact records the hash of the configuration it was produced from and the SHA-256 of its own
content, so that tampering or mixing up runs can be detected with :func:`verify_artifact`:

- CSV files start with ``# config_hash=...`` and ``# content_sha256=...`` comment lines, the content hash
  covers everything after them;
- NDJSON files start with a ``{"provenance": {...}}`` line, the content hash covers the remaining lines;
- JSON files have a top-level ``"provenance"`` entry, the content hash covers the canonical serialization
  of the rest of the document.
"""
from typing import Any, Iterable, Optional, Sequence
import csv
import hashlib
import io
import json
import logging
import os

from roughsurf.utils import ArtifactIntegrityError


_logger = logging.getLogger('roughsurf.tools')

PROVENANCE_KEY = 'provenance'


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def stable_hash(value: Any) -> str:
    """SHA-256 of the canonical JSON serialization of ``value``"""
    return hashlib.sha256(canonical_json(value).encode('utf-8')).hexdigest()


def _text_hash(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def _prepare(path: str) -> str:
    dirname = os.path.dirname(path)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]], config_hash: str) -> str:
    """
    Returns:
        The absolute path of the written file.
    """
    body = io.StringIO()
    writer = csv.writer(body, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    content = body.getvalue()
    with open(_prepare(path), 'w', newline='', encoding='utf-8') as file:
        file.write(f'# config_hash={config_hash}\n')
        file.write(f'# content_sha256={_text_hash(content)}\n')
        file.write(content)
    return os.path.abspath(path)


def write_ndjson(path: str, records: Iterable[dict], config_hash: str) -> str:
    """
    Returns:
        The absolute path of the written file.
    """
    content = ''.join(canonical_json(record) + '\n' for record in records)
    provenance = {'config_hash': config_hash, 'content_sha256': _text_hash(content)}
    with open(_prepare(path), 'w', encoding='utf-8') as file:
        file.write(canonical_json({PROVENANCE_KEY: provenance}) + '\n')
        file.write(content)
    return os.path.abspath(path)


def write_json(path: str, document: dict, config_hash: str) -> str:
    """
    Writes ``document`` with a ``provenance`` entry added.

    Returns:
        The absolute path of the written file.
    """
    document = {key: value for key, value in document.items() if key != PROVENANCE_KEY}
    provenance = {'config_hash': config_hash, 'content_sha256': stable_hash(document)}
    with open(_prepare(path), 'w', encoding='utf-8') as file:
        file.write(canonical_json({**document, PROVENANCE_KEY: provenance}))
    return os.path.abspath(path)


def _read_csv(text: str) -> tuple[dict, str]:
    provenance = {}
    lines = text.splitlines(keepends=True)
    consumed = 0
    for line in lines:
        if not line.startswith('# '):
            break
        key, _, value = line[2:].rstrip('\n').partition('=')
        provenance[key] = value
        consumed += 1
    return provenance, _text_hash(''.join(lines[consumed:]))


def _read_ndjson(text: str) -> tuple[dict, str]:
    first, _, rest = text.partition('\n')
    return json.loads(first).get(PROVENANCE_KEY, {}), _text_hash(rest)


def _read_json(text: str) -> tuple[dict, str]:
    document = json.loads(text)
    provenance = document.pop(PROVENANCE_KEY, {})
    return provenance, stable_hash(document)


def verify_artifact(path: str, config_hash: Optional[str] = None) -> dict:
    """
    Recomputes the content hash of an artifact and compares it with the recorded one.

    Args:
        path: A ``.csv``, ``.ndjson`` or ``.json`` artifact.
        config_hash: If given, the configuration hash the artifact must carry.

    Returns:
        The recorded provenance.

    Raises:
        ArtifactIntegrityError: If the provenance is missing or does not match.
        ValueError: If the file type is not supported.
    """
    readers = {'.csv': _read_csv, '.ndjson': _read_ndjson, '.json': _read_json}
    extension = os.path.splitext(path)[1]
    if extension not in readers:
        raise ValueError(f'Unsupported artifact type "{extension}", expected one of {sorted(readers)}.')
    with open(path, 'r', encoding='utf-8') as file:
        text = file.read()
    try:
        provenance, content_hash = readers[extension](text)
    except json.JSONDecodeError as e:
        raise ArtifactIntegrityError(f'{path} is not valid JSON: {e}') from None

    if 'config_hash' not in provenance or 'content_sha256' not in provenance:
        msg = f'{path} carries no provenance.'
        _logger.error(msg)
        raise ArtifactIntegrityError(msg)
    if provenance['content_sha256'] != content_hash:
        msg = f'{path} was modified after it was written (content hash mismatch).'
        _logger.error(msg)
        raise ArtifactIntegrityError(msg)
    if config_hash is not None and provenance['config_hash'] != config_hash:
        msg = f'{path} was produced from another configuration ({provenance["config_hash"][:12]}...).'
        _logger.error(msg)
        raise ArtifactIntegrityError(msg)
    return provenance
