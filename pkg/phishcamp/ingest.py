"""
ingest.py

Loading, validating and enriching URL records, and the error-page filter.
"""
from __future__ import annotations

import abc
import dataclasses
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import FrozenSet, List, Optional, Tuple

from bson import json_util

from phishcamp.exceptions import (DuplicateUrl, EnrichmentUnavailable,
                                  IncorrectParameters, ParseError)
from phishcamp.model import EnrichedUrlRecord
from phishcamp.textsim import tokenize_url, word_tokens
from phishcamp.utils.convert import record_from_dict, record_to_dict
from phishcamp.utils.fixtures import ENRICHABLE_FIELDS, LoadFixture

logger = logging.getLogger(__name__)

DEFAULT_ERROR_TOKEN_THRESHOLD = 0.5


@dataclass(frozen=True)
class ErrorPageDictionary:
    """
    Phrases that mark a page text as an error page, plus the error vocabulary
    whose share of a text decides the rest.

    ``tokens`` is the explicit ``words`` list together with every one-word
    phrase. Words of longer phrases only count as part of their phrase.
    """
    phrases: FrozenSet[str]
    token_fraction_threshold: float = DEFAULT_ERROR_TOKEN_THRESHOLD
    words: FrozenSet[str] = frozenset()
    tokens: FrozenSet[str] = field(init=False, compare=False)
    phrase_tokens: FrozenSet[Tuple[str, ...]] = field(init=False, compare=False)

    def __post_init__(self):
        phrases = frozenset(phrase.strip().lower() for phrase in self.phrases if phrase.strip())
        if not phrases:
            raise IncorrectParameters('An error-page dictionary needs at least one phrase.')
        if not 0 < self.token_fraction_threshold <= 1:
            raise IncorrectParameters('token_fraction_threshold must be in (0, 1], got %s'
                                      % self.token_fraction_threshold)
        phrase_tokens = frozenset(tuple(word_tokens(phrase, drop_short=False)) for phrase in phrases)
        phrase_tokens = frozenset(tokens for tokens in phrase_tokens if tokens)
        words = frozenset(token for word in self.words for token in word_tokens(word, drop_short=False))

        object.__setattr__(self, 'phrases', phrases)
        object.__setattr__(self, 'words', words)
        object.__setattr__(self, 'phrase_tokens', phrase_tokens)
        object.__setattr__(self, 'tokens', words | frozenset(
            tokens[0] for tokens in phrase_tokens if len(tokens) == 1))

    def extend(self, phrases, words=()):
        return ErrorPageDictionary(self.phrases | frozenset(phrases), self.token_fraction_threshold,
                                   self.words | frozenset(words))


def load_error_dictionary(path=None, token_fraction_threshold=DEFAULT_ERROR_TOKEN_THRESHOLD):
    """
    Read a dictionary file: one entry per line, ``#`` starts a comment.
    Entries below a ``[words]`` header are error vocabulary, entries below
    ``[phrases]`` (or before any header) are phrases.
    Without ``path`` the dictionary shipped in ``phishcamp/data`` is used.
    """
    if path is None:
        text = resources.files('phishcamp.data').joinpath('error_phrases.txt').read_text('utf-8')
    else:
        with open(path, 'r', encoding='utf-8') as dictionary_file_obj:
            text = dictionary_file_obj.read()

    sections = {'phrases': set(), 'words': set()}
    current = sections['phrases']
    for line in text.splitlines():
        entry = line.split('#', 1)[0].strip()
        if not entry:
            continue
        if entry.startswith('[') and entry.endswith(']'):
            name = entry[1:-1].strip().lower()
            if name not in sections:
                raise IncorrectParameters('Unknown error dictionary section [%s]' % name)
            current = sections[name]
            continue
        current.add(entry)

    return ErrorPageDictionary(frozenset(sections['phrases']), token_fraction_threshold,
                               frozenset(sections['words']))


def _contains_sequence(tokens, sequence):
    width = len(sequence)
    return any(tuple(tokens[start:start + width]) == sequence
               for start in range(len(tokens) - width + 1))


def is_error_page(text: Optional[str], dictionary: ErrorPageDictionary) -> bool:
    """
    True when the text holds no usable content, contains a dictionary phrase
    as a run of whole words, or is mostly made of error vocabulary.
    """
    tokens = word_tokens(text, drop_short=False)
    if not tokens:
        return True

    if any(_contains_sequence(tokens, phrase) for phrase in dictionary.phrase_tokens):
        return True

    hits = sum(1 for token in tokens if token in dictionary.tokens)
    return hits / len(tokens) >= dictionary.token_fraction_threshold


def load_dataset(path: str, drop_url_scheme: bool = False) -> List[EnrichedUrlRecord]:
    """
    Load a JSON-lines dataset. Line order defines record order.

    ``url_tokens`` are derived from the url when a line does not carry them.
    """
    records = []
    seen = {}

    with open(path, 'r', encoding='utf-8') as dataset_file_obj:
        for line_number, line in enumerate(dataset_file_obj, start=1):
            if not line.strip():
                continue
            try:
                document = json.loads(line, object_hook=json_util.object_hook)
            except ValueError as error:
                raise ParseError('Line %s is not valid JSON: %s' % (line_number, error),
                                 line_number=line_number)

            record = record_from_dict(document, line_number=line_number)

            if record.url in seen:
                raise DuplicateUrl('%s appears on lines %s and %s'
                                   % (record.url, seen[record.url], line_number))
            seen[record.url] = line_number

            if not record.url_tokens:
                record = dataclasses.replace(
                    record, url_tokens=tuple(tokenize_url(record.url, drop_scheme=drop_url_scheme)))

            records.append(record)

    logger.info('Loaded %s records from %s', len(records), path)
    return records


def write_dataset(records, path):
    """
    Write records as JSON lines, one record per line, keys sorted.
    """
    with open(path, 'w', encoding='utf-8') as dataset_file_obj:
        for record in records:
            dataset_file_obj.write(json.dumps(record_to_dict(record), sort_keys=True,
                                              ensure_ascii=False))
            dataset_file_obj.write('\n')


class EnrichmentClient(abc.ABC):
    """
    A source of signal values for URLs.

    ``capabilities`` names the record fields the client can populate.
    Implementations must be safe to call from several threads.
    """
    capabilities = frozenset(ENRICHABLE_FIELDS)

    @abc.abstractmethod
    def lookup(self, url):
        """
        Return a dict of field name to value for ``url``; raise
        ``EnrichmentUnavailable`` when the source has nothing.
        """


class FixtureEnrichmentClient(EnrichmentClient):
    """
    Enrichment from a directory of JSON fixtures (see ``phishcamp.utils.fixtures``).
    """

    def __init__(self, directory, capabilities=None):
        self.loader = LoadFixture(directory)
        if capabilities is not None:
            self.capabilities = frozenset(capabilities)

    def lookup(self, url):
        return self.loader.load(url)


class MongoEnrichmentClient(EnrichmentClient):
    """
    Enrichment from a MongoDB collection holding one document per URL, keyed
    by ``url``.
    """

    def __init__(self, connection, capabilities=None):
        self.connection = connection
        self._lock = threading.Lock()
        if capabilities is not None:
            self.capabilities = frozenset(capabilities)

    def lookup(self, url):
        from pymongo.errors import ConnectionFailure

        try:
            with self._lock:
                document = self.connection.find_one({'url': url})
        except ConnectionFailure as error:
            raise EnrichmentUnavailable('MongoDB unreachable for %s: %s' % (url, error))

        if document is None:
            raise EnrichmentUnavailable('No enrichment document for %s' % url)

        return {name: document[name] for name in ENRICHABLE_FIELDS if name in document}


@dataclass
class EnrichmentStats:
    """
    Counters kept while enriching.
    """
    enriched: int = 0
    unchanged: int = 0
    warnings: int = 0


def _is_absent(value):
    return value is None or (isinstance(value, (str, dict, frozenset, tuple)) and not value)


def _coerce(name, value):
    if name == 'ips':
        return frozenset(value)
    if name == 'tag_counts':
        return {str(tag): int(count) for tag, count in value.items()}
    return value


def enrich_record(record: EnrichedUrlRecord, client: EnrichmentClient):
    """
    Fill the absent fields of one record the client can populate; present
    fields are never overwritten. Returns ``(record, changed)``.
    """
    values = client.lookup(record.url)

    updates = {}
    for name, value in values.items():
        if name not in client.capabilities or name not in ENRICHABLE_FIELDS:
            continue
        if _is_absent(getattr(record, name)) and not _is_absent(value):
            updates[name] = _coerce(name, value)

    if not updates:
        return record, False
    return dataclasses.replace(record, **updates), True


def enrich(records: List[EnrichedUrlRecord], client: EnrichmentClient,
           stats: Optional[EnrichmentStats] = None, max_workers: int = 4):
    """
    Enrich every record through ``client``, preserving order.

    Records the client cannot answer for pass through unchanged and count as
    a warning in ``stats``.
    """
    stats = stats if stats is not None else EnrichmentStats()

    def work(record):
        try:
            return enrich_record(record, client) + (None, )
        except EnrichmentUnavailable as error:
            return record, False, error

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        results = list(executor.map(work, records))

    enriched = []
    for record, changed, error in results:
        if error is not None:
            stats.warnings += 1
            logger.warning('Enrichment unavailable: %s', error)
        elif changed:
            stats.enriched += 1
        else:
            stats.unchanged += 1
        enriched.append(record)

    logger.info('Enriched %s records (%s unchanged, %s warnings)',
                stats.enriched, stats.unchanged, stats.warnings)
    return enriched


def has_only_error_text(record: EnrichedUrlRecord, dictionary: ErrorPageDictionary) -> bool:
    """
    True when the record has page text and every text it has is an error page.
    """
    texts = [text for text in (record.html_text, record.ocr_text_own, record.ocr_text_pt) if text]
    return bool(texts) and all(is_error_page(text, dictionary) for text in texts)


def drop_error_records(records, dictionary):
    """
    Remove records whose HTML and OCR texts are all error pages.
    """
    kept = [record for record in records if not has_only_error_text(record, dictionary)]
    if len(kept) != len(records):
        logger.warning('Dropped %s records whose page texts are all error pages',
                       len(records) - len(kept))
    return kept
