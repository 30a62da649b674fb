"""
textsim.py

Text processing for the textual signals: URL tokenization, TF-IDF models,
cosine similarity and the OCR merge heuristics.
"""

import itertools
import logging
import re
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from sklearn.feature_extraction.text import CountVectorizer, TfidfVectorizer
from sklearn.metrics.pairwise import cosine_similarity as sk_cosine_similarity

from phishcamp.exceptions import DimensionMismatch, EmptyCorpus
from phishcamp.model import TfidfModel

logger = logging.getLogger(__name__)

URL_DELIMITERS = frozenset('.?-/_=&:~%#@')
URL_SCHEME_TOKENS = frozenset(['http', 'https', 'www'])

DEFAULT_OCR_SIM_THRESHOLD = 0.8

_URL_SPLIT = re.compile('[%s]+' % re.escape(''.join(sorted(URL_DELIMITERS))))
_WORD = re.compile(r'[^\W_]+')

_model_ids = itertools.count(1)


def tokenize_url(url, drop_scheme=False):
    """
    Split a URL into lowercase tokens on the delimiter set.

    ::

        >>> tokenize_url('s286.paypal-login.net')
        ['s286', 'paypal', 'login', 'net']

    """
    tokens = [token for token in _URL_SPLIT.split(url.lower()) if token]
    if drop_scheme:
        tokens = [token for token in tokens if token not in URL_SCHEME_TOKENS]
    return tokens


def word_tokens(text, drop_short=True):
    """
    Lowercase word tokens split on whitespace and punctuation.

    With ``drop_short`` single characters are dropped unless they are digits.
    """
    if not text:
        return []
    tokens = _WORD.findall(text.lower())
    if drop_short:
        tokens = [token for token in tokens if len(token) > 1 or token.isdigit()]
    return tokens


@dataclass(frozen=True)
class TfidfVector:
    """
    A sparse (1 x vocabulary) TF-IDF row and the id of the model it came from.
    """
    model_id: int
    row: sparse.csr_matrix

    @property
    def is_zero(self):
        return self.row.nnz == 0


def fit_tfidf(docs, analyzer=None, drop_short=True):
    """
    Fit a smoothed, L2 normalized TF-IDF model over ``(doc_id, text)`` pairs.

    ``analyzer`` turns a document into tokens; it defaults to
    :func:`word_tokens`. Empty documents are counted in ``num_docs`` and
    vectorize to the zero vector.
    """
    if not docs:
        raise EmptyCorpus('Cannot fit a TF-IDF model over zero documents.')

    if analyzer is None:
        def analyzer(text):
            return word_tokens(text, drop_short=drop_short)

    texts = [text or '' for _, text in docs]
    model_id = next(_model_ids)

    if not any(analyzer(text) for text in texts):
        # sklearn refuses an empty vocabulary; every vector is zero anyway
        logger.debug('TF-IDF model %s has an empty vocabulary', model_id)
        return TfidfModel(vocabulary={}, doc_freq={}, num_docs=len(texts),
                          vectorizer=None, model_id=model_id)

    vectorizer = TfidfVectorizer(analyzer=analyzer, smooth_idf=True, norm='l2',
                                 sublinear_tf=False)
    vectorizer.fit(texts)
    counts = CountVectorizer(analyzer=analyzer,
                             vocabulary=vectorizer.vocabulary_).transform(texts)

    vocabulary = {str(token): int(index) for token, index in vectorizer.vocabulary_.items()}
    frequencies = np.bincount(counts.tocsr().indices, minlength=len(vocabulary))
    doc_freq = {token: int(frequencies[index]) for token, index in vocabulary.items()}

    logger.debug('Fitted TF-IDF model %s over %s documents, %s terms',
                 model_id, len(texts), len(vocabulary))

    return TfidfModel(vocabulary=vocabulary, doc_freq=doc_freq, num_docs=len(texts),
                      vectorizer=vectorizer, model_id=model_id)


def vectorize(model, text):
    """
    Vectorize one document; tokens outside the vocabulary are dropped.
    """
    if model.vectorizer is None:
        return TfidfVector(model.model_id, sparse.csr_matrix((1, max(model.size, 1))))
    return TfidfVector(model.model_id, model.vectorizer.transform([text or '']).tocsr())


def vectorize_many(model, texts):
    texts = [text or '' for text in texts]
    if not texts:
        return []
    if model.vectorizer is None:
        return [vectorize(model, text) for text in texts]
    matrix = model.vectorizer.transform(texts).tocsr()
    return [TfidfVector(model.model_id, matrix[index]) for index in range(matrix.shape[0])]


def cosine_similarity(a, b):
    """
    Cosine similarity of two vectors of the same model, clipped to [0, 1].

    Zero vectors have similarity 0 with everything.
    """
    if a.model_id != b.model_id or a.row.shape != b.row.shape:
        raise DimensionMismatch('Vectors come from models %s and %s.' % (a.model_id, b.model_id))
    if a.is_zero or b.is_zero:
        return 0.0
    value = float(sk_cosine_similarity(a.row, b.row)[0, 0])
    return min(1.0, max(0.0, value))


def text_similarity(text_a, text_b, drop_short=True):
    """
    Cosine similarity of the raw word counts of two texts.
    """
    def analyzer(text):
        return word_tokens(text, drop_short=drop_short)

    if not analyzer(text_a) or not analyzer(text_b):
        return 0.0
    counts = CountVectorizer(analyzer=analyzer).fit_transform([text_a, text_b])
    return min(1.0, max(0.0, float(sk_cosine_similarity(counts[0], counts[1])[0, 0])))


def merge_ocr(ocr_own, ocr_pt, sim_threshold=DEFAULT_OCR_SIM_THRESHOLD, drop_short=True):
    """
    Merge the self-captured and the platform OCR text of one URL.

    Identical texts keep the first, similar texts keep the longer one, and
    dissimilar texts are concatenated (own first).
    """
    if not ocr_own and not ocr_pt:
        return None
    if not ocr_pt:
        return ocr_own
    if not ocr_own:
        return ocr_pt
    if ocr_own == ocr_pt:
        return ocr_own

    if text_similarity(ocr_own, ocr_pt, drop_short=drop_short) >= sim_threshold:
        return ocr_pt if len(ocr_pt) > len(ocr_own) else ocr_own

    return ocr_own + ' ' + ocr_pt


def clean_html_text(record, dictionary):
    """
    The HTML text of a record, or None when it is absent or an error page.
    """
    from phishcamp.ingest import is_error_page

    if record.html_text and not is_error_page(record.html_text, dictionary):
        return record.html_text
    return None


def merged_ocr_text(record, dictionary, sim_threshold=DEFAULT_OCR_SIM_THRESHOLD, drop_short=True):
    """
    The merged OCR text of a record; OCR texts showing error pages count as
    absent.
    """
    from phishcamp.ingest import is_error_page

    own, pt = record.ocr_text_own, record.ocr_text_pt
    if own and is_error_page(own, dictionary):
        own = None
    if pt and is_error_page(pt, dictionary):
        pt = None
    return merge_ocr(own, pt, sim_threshold, drop_short=drop_short)


def long_doc_text(record, dictionary, sim_threshold=DEFAULT_OCR_SIM_THRESHOLD, drop_short=True):
    """
    The text a record contributes to its component's LongDoc: the HTML text,
    falling back to the merged OCR text when the HTML is missing or an error
    page.
    """
    html = clean_html_text(record, dictionary)
    if html:
        return html
    return merged_ocr_text(record, dictionary, sim_threshold, drop_short=drop_short) or ''
