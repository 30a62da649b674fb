"""
convert.py

Converters between phishcamp objects and plain JSON-ready python objects.
"""
from __future__ import annotations

import datetime
import enum

import numpy as np

from phishcamp.exceptions import MissingRequiredField, ParseError, ValueNotSupported
from phishcamp.model import EnrichedUrlRecord, to_utc

RECORD_FIELDS = (
    'url',
    'url_tokens',
    'ips',
    'dns',
    'reverse_dns',
    'geoip',
    'country_code',
    'target',
    'submission_time',
    'html_text',
    'ocr_text_own',
    'ocr_text_pt',
    'tag_counts',
)


class BaseConvert(object):
    """
    This object contains the base elements required to convert a python
    object into a JSON-ready object.

    Includes the methods decode_dict and decode_list

    `other_input` is a dictionary where the key is the object type to be evaluated
    and the value is the method call in which to evaluate the key against.

    """

    supported_iterables = [dict, list]

    def __init__(self, **kwargs):

        self.other_input = {}

    def decode_item(self, item):
        if isinstance(item, (set, frozenset)):
            item = self.decode_list(sorted(item, key=str))

        elif isinstance(item, (list, tuple)):
            item = self.decode_list(item)

        elif isinstance(item, dict):
            item = self.decode_dict(item)

        for evaluation_type, evaluation_behavior in self.other_input.items():

            if isinstance(item, evaluation_type):

                item = evaluation_behavior(item)

        return(item)

    def decode_dict(self, input_dict):

        output_dict = {}

        for key, item in input_dict.items():
            if isinstance(key, enum.Enum):
                key = key.value
            output_dict[key] = self.decode_item(item)

        return(output_dict)

    def decode_list(self, input_list):

        return([self.decode_item(item) for item in input_list])

    def convert(self, iterable):
        """
        Public method to convert.

        """

        if isinstance(iterable, (list, tuple)):
            output = self.decode_list(iterable)

        elif isinstance(iterable, dict):
            output = self.decode_dict(iterable)

        else:
            raise ValueNotSupported("The type of iterable you have passed is not currently supported. \n\
                                    You passed: %s\n\
                                    Please pass one of the following: %s " %
                                    (iterable.__class__, self.supported_iterables))

        return(output)


class Serializer(BaseConvert):
    """
    Converts datetimes, enums and numpy scalars so the result can go
    straight into ``json.dumps``.

    * datetimes become ISO-8601 UTC strings with a ``Z`` suffix
    * enums become their value
    * numpy scalars become python numbers
    * sets become sorted lists

    """

    def __init__(self, **kwargs):

        super(Serializer, self).__init__(**kwargs)

        self.other_input = {
            datetime.datetime: self.decode_datetime,
            enum.Enum: self.decode_enum,
            np.generic: self.decode_numpy,
        }

    def decode_datetime(self, datetime_obj):
        return(format_timestamp(datetime_obj))

    def decode_enum(self, enum_obj):
        return(enum_obj.value)

    def decode_numpy(self, numpy_obj):
        return(numpy_obj.item())


def format_timestamp(timestamp):
    return(to_utc(timestamp).strftime('%Y-%m-%dT%H:%M:%SZ'))


def parse_timestamp(value):
    """
    Parse an ISO-8601 timestamp (``Z`` suffix allowed) into an aware UTC
    datetime with second precision.
    """
    if isinstance(value, datetime.datetime):
        return(to_utc(value))
    if isinstance(value, dict) and '$date' in value:
        # bson.json_util extended JSON
        value = value['$date']
    if isinstance(value, (int, float)):
        return(to_utc(datetime.datetime.fromtimestamp(value / 1000.0, datetime.timezone.utc)))
    if not isinstance(value, str):
        raise ValueNotSupported('Cannot read a timestamp from %r' % (value, ))
    text = value.strip()
    if text.endswith('Z') or text.endswith('z'):
        text = text[:-1] + '+00:00'
    try:
        return(to_utc(datetime.datetime.fromisoformat(text)))
    except ValueError:
        raise ValueNotSupported('Not an ISO-8601 timestamp: %r' % value)


def record_to_dict(record):
    """
    Turn a record into a JSON-ready dict; field names as on the record.
    """
    document = {name: getattr(record, name) for name in RECORD_FIELDS}
    return(Serializer().convert(document))


def record_from_dict(document, line_number=None):
    """
    Build a validated record from a decoded JSON object.
    """
    if not isinstance(document, dict):
        raise ParseError('Line %s is not a JSON object.' % line_number, line_number=line_number)

    unknown = set(document) - set(RECORD_FIELDS)
    if unknown:
        raise ParseError('Line %s has unknown fields: %s' % (line_number, ', '.join(sorted(unknown))),
                         line_number=line_number)

    if not document.get('url'):
        raise MissingRequiredField('Line %s has no url.' % line_number)
    if document.get('submission_time') in (None, ''):
        raise MissingRequiredField('Line %s (%s) has no submission_time.'
                                   % (line_number, document['url']))

    try:
        fields = dict(document)
        fields['submission_time'] = parse_timestamp(document['submission_time'])
        fields['ips'] = frozenset(document.get('ips') or ())
        fields['url_tokens'] = tuple(document.get('url_tokens') or ())
        fields['tag_counts'] = {str(tag): int(count)
                                for tag, count in (document.get('tag_counts') or {}).items()}
        return(EnrichedUrlRecord(**fields))
    except (TypeError, ValueError, ValueNotSupported) as error:
        raise ParseError('Line %s: %s' % (line_number, error), line_number=line_number)
