"""
synth.py

Synthetic datasets with planted campaigns. Every campaign shares a URL
template, an IP pool split into IP-disjoint subgroups, a page text template
and consistent hosting values; the ground truth maps every URL to the
campaign that generated it.
"""
from __future__ import annotations

import dataclasses
import datetime
import json
import logging
import string
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from phishcamp.exceptions import InvalidSpec
from phishcamp.model import EnrichedUrlRecord
from phishcamp.textsim import tokenize_url
from phishcamp.utils.fixtures import ENRICHABLE_FIELDS

logger = logging.getLogger(__name__)

BRANDS = ('paypal', 'amazon', 'apple', 'microsoft', 'netflix', 'chase', 'dhl', 'wellsfargo',
          'outlook', 'dropbox', 'docusign', 'linkedin', 'facebook', 'instagram', 'adobe')
TLDS = ('net', 'com', 'info', 'xyz', 'online', 'site', 'top', 'club')
COUNTRIES = ('US', 'RU', 'NL', 'DE', 'FR', 'CN', 'BR', 'GB', 'UA', 'SG')
HTML_TAGS = ('a', 'abbr', 'b', 'body', 'br', 'button', 'div', 'em', 'footer', 'form', 'h1', 'h2',
             'h3', 'head', 'header', 'html', 'i', 'iframe', 'img', 'input', 'label', 'li', 'link',
             'meta', 'nav', 'p', 'script', 'section', 'span', 'style', 'table', 'td', 'tr', 'ul')
ERROR_PAGE_TEXT = '404 Not Found'

_EPOCH = datetime.datetime(2020, 1, 1, tzinfo=datetime.timezone.utc)


@dataclass(frozen=True)
class SynthSpec:
    """
    Parameters of a synthetic dataset.
    """
    #: Number of planted campaigns.
    num_campaigns: int = 5

    #: Inclusive (min, max) number of URLs per campaign.
    urls_per_campaign: Tuple[int, int] = (20, 20)

    #: IP addresses per campaign, shared out over its subgroups.
    ip_pool_per_campaign: int = 6

    #: Subgroups per campaign whose IPs are disjoint from the rest of the
    #: campaign; they only join the campaign through their texts.
    ip_disjoint_subgroups: int = 0

    #: Words in each campaign's own vocabulary.
    template_vocab_size: int = 40

    #: Words in a page text.
    template_length: int = 30

    #: Probability that a word of a page text is swapped for a noise word.
    noise_rate: float = 0.1

    #: Words in the noise vocabulary shared by all campaigns.
    noise_vocab_size: int = 50

    #: Probability that a page's HTML text is an error page (the OCR text
    #: then carries the content).
    error_page_rate: float = 0.0

    #: Hours over which a campaign's submissions are spread.
    time_window_hours: float = 48.0

    #: Hours between the start of consecutive campaigns.
    campaign_spacing_hours: float = 240.0

    #: Distinct HTML tags per page template.
    tags_per_page: int = 6

    seed: int = 0

    def __post_init__(self):
        urls = self.urls_per_campaign
        if isinstance(urls, int):
            urls = (urls, urls)
        try:
            urls = tuple(int(value) for value in urls)
        except (TypeError, ValueError):
            raise InvalidSpec('urls_per_campaign must be an integer or a [min, max] pair.')
        object.__setattr__(self, 'urls_per_campaign', urls)

        groups = 1 + self.ip_disjoint_subgroups
        if self.num_campaigns < 1:
            raise InvalidSpec('num_campaigns must be at least 1, got %s' % self.num_campaigns)
        if len(urls) != 2 or urls[0] > urls[1]:
            raise InvalidSpec('urls_per_campaign must be a [min, max] pair, got %s' % (urls, ))
        if self.ip_disjoint_subgroups < 0:
            raise InvalidSpec('ip_disjoint_subgroups cannot be negative.')
        if urls[0] < groups:
            raise InvalidSpec('Each of the %s groups of a campaign needs a URL; min urls is %s'
                              % (groups, urls[0]))
        if self.ip_pool_per_campaign < groups:
            raise InvalidSpec('ip_pool_per_campaign (%s) must cover %s groups'
                              % (self.ip_pool_per_campaign, groups))
        if self.num_campaigns > 250 or self.ip_pool_per_campaign > 250 or groups > 250:
            raise InvalidSpec('Synthetic IPs support at most 250 campaigns, groups and pool addresses.')
        if not 0 <= self.noise_rate <= 1 or not 0 <= self.error_page_rate <= 1:
            raise InvalidSpec('noise_rate and error_page_rate must be in [0, 1].')
        if min(self.template_vocab_size, self.template_length, self.noise_vocab_size) < 1:
            raise InvalidSpec('Vocabulary sizes and template_length must be positive.')
        if not 1 <= self.tags_per_page <= len(HTML_TAGS):
            raise InvalidSpec('tags_per_page must be in [1, %s]' % len(HTML_TAGS))
        if self.time_window_hours <= 0 or self.campaign_spacing_hours < 0:
            raise InvalidSpec('time_window_hours must be positive and campaign_spacing_hours non-negative.')

    @classmethod
    def from_dict(cls, document):
        if not isinstance(document, dict):
            raise InvalidSpec('A synth spec is a JSON object.')
        known = {spec_field.name for spec_field in dataclasses.fields(cls)}
        unknown = set(document) - known
        if unknown:
            raise InvalidSpec('Unknown synth spec fields: %s' % ', '.join(sorted(unknown)))
        try:
            return cls(**document)
        except TypeError as error:
            raise InvalidSpec(str(error))


def load_synth_spec(path) -> SynthSpec:
    try:
        with open(path, 'r', encoding='utf-8') as spec_file_obj:
            document = json.load(spec_file_obj)
    except ValueError as error:
        raise InvalidSpec('%s is not valid JSON: %s' % (path, error))
    return SynthSpec.from_dict(document)


class _Words(object):
    """
    Draws unique lowercase words so campaign vocabularies never overlap.
    """

    def __init__(self, rng):
        self.rng = rng
        self.used = set()

    def draw(self, count):
        words = []
        while len(words) < count:
            length = int(self.rng.integers(5, 10))
            word = ''.join(self.rng.choice(list(string.ascii_lowercase), size=length))
            if word not in self.used:
                self.used.add(word)
                words.append(word)
        return words


def _noisy(template, noise_vocab, noise_rate, rng):
    words = list(template)
    for position in range(len(words)):
        if rng.random() < noise_rate:
            words[position] = noise_vocab[int(rng.integers(len(noise_vocab)))]
    return ' '.join(words)


def _split(total, parts):
    base, extra = divmod(total, parts)
    return [base + (1 if index < extra else 0) for index in range(parts)]


def generate(spec: SynthSpec) -> Tuple[List[EnrichedUrlRecord], Dict[str, int]]:
    """
    Generate a dataset and its ground truth (url -> campaign id).

    Records come out grouped by campaign; the same spec always yields the
    same records.
    """
    rng = np.random.default_rng(spec.seed)
    words = _Words(rng)
    noise_vocab = words.draw(spec.noise_vocab_size)

    records = []
    truth = {}
    groups = 1 + spec.ip_disjoint_subgroups

    for campaign_id in range(spec.num_campaigns):
        brand = BRANDS[campaign_id % len(BRANDS)]
        domain = '%s-%s.%s' % (brand, words.draw(1)[0], TLDS[int(rng.integers(len(TLDS)))])
        vocabulary = words.draw(spec.template_vocab_size)
        template = list(rng.choice(vocabulary, size=spec.template_length))
        country = COUNTRIES[int(rng.integers(len(COUNTRIES)))]
        start = _EPOCH + datetime.timedelta(hours=campaign_id * spec.campaign_spacing_hours)

        url_count = int(rng.integers(spec.urls_per_campaign[0], spec.urls_per_campaign[1] + 1))
        ip_pools = [['10.%s.%s.%s' % (campaign_id, group, host) for host in range(size)]
                    for group, size in enumerate(_split(spec.ip_pool_per_campaign, groups))]

        subdomains = set()
        for group, group_size in enumerate(_split(url_count, groups)):
            tags = rng.choice(HTML_TAGS, size=spec.tags_per_page, replace=False)
            tag_template = {str(tag): int(rng.integers(1, 20)) for tag in tags}
            pool = ip_pools[group]

            for _ in range(group_size):
                subdomain = 's%s' % int(rng.integers(1, 100000))
                while subdomain in subdomains:
                    subdomain = 's%s' % int(rng.integers(1, 100000))
                subdomains.add(subdomain)
                url = '%s.%s' % (subdomain, domain)

                # the anchor address makes every subgroup a clique
                extra = [ip for ip in pool[1:] if rng.random() < 0.5]
                html = _noisy(template, noise_vocab, spec.noise_rate, rng)
                ocr = _noisy(template, noise_vocab, spec.noise_rate, rng)
                if rng.random() < spec.error_page_rate:
                    html = ERROR_PAGE_TEXT

                offset = float(rng.random()) * spec.time_window_hours * 3600
                tag_counts = {tag: max(0, count + int(rng.integers(-1, 2)))
                              for tag, count in tag_template.items()}

                records.append(EnrichedUrlRecord(
                    url=url,
                    submission_time=start + datetime.timedelta(seconds=int(offset)),
                    url_tokens=tuple(tokenize_url(url)),
                    ips=frozenset([pool[0]] + extra),
                    dns='ns1.%s' % domain,
                    reverse_dns='host%s.hosting-%s.net' % (campaign_id, country.lower()),
                    geoip='%s-%s' % (country, campaign_id),
                    country_code=country,
                    target=brand.capitalize(),
                    html_text=html,
                    ocr_text_own=ocr,
                    tag_counts=tag_counts,
                ))
                truth[url] = campaign_id

    logger.info('Generated %s URLs in %s planted campaigns (seed %s)',
                len(records), spec.num_campaigns, spec.seed)
    return records, truth


def strip_enrichment(records, fields=ENRICHABLE_FIELDS):
    """
    Copies of ``records`` with the enrichable fields cleared, as they look
    before enrichment.
    """
    defaults = {spec_field.name: spec_field.default if spec_field.default is not dataclasses.MISSING
                else spec_field.default_factory()
                for spec_field in dataclasses.fields(EnrichedUrlRecord) if spec_field.name in fields}
    return [dataclasses.replace(record, **defaults) for record in records]


def write_truth(truth, path):
    with open(path, 'w', encoding='utf-8') as truth_file_obj:
        json.dump(truth, truth_file_obj, indent=2, sort_keys=True)


def load_truth(path) -> Dict[str, int]:
    with open(path, 'r', encoding='utf-8') as truth_file_obj:
        document = json.load(truth_file_obj)
    if not isinstance(document, dict):
        raise InvalidSpec('%s must map url to campaign id.' % path)
    return {str(url): int(label) for url, label in document.items()}
