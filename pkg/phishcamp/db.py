"""
db.py

A class for connecting to the MongoDB instance that holds enrichment data
"""
import logging
import time

import pymongo
from pymongo.errors import (AutoReconnect,
                            ConnectionFailure,
                            OperationFailure)

logger = logging.getLogger(__name__)


class Connection(object):
    """
    A wrapper around ``pymongo.MongoClient`` that stores a persistent set of
    connection information and retries dropped connections.

    ::

        enrichment_db = Connection(db='intel', collection='urls', max_retries=5)
        enrichment_db.find_one({'url': 's286.paypal-login.net'})

    """
    def __init__(self,
                host='localhost',
                port=27017,
                db='phishcamp',
                collection='enrichment',
                username=None,
                password=None,
                max_retries=2,
                retry_delay=2,
                **options):
        #: The port that the MongoDB connection lives on
        self.port = port

        #: The host or IP address to connect to
        self.host = host

        #: The name of the database
        self.db = db

        #: The name of the collection holding one document per URL
        self.collection = collection

        #: The database username
        self.username = username

        #: The database password
        self.password = password

        #: The number of retries to attempt to reconnect after a connection
        #: is dropped.
        self.max_retries = max_retries

        #: Seconds to wait between two attempts
        self.retry_delay = retry_delay

        #: Additional options to pass into the pymongo client
        self.options = options

        self._client = None

    def _connect_to_db(self):
        """
        Create the client once and return the collection.
        """
        if self._client is None:
            options = dict(self.options)
            if self.username and self.password:
                options.update(username=self.username, password=self.password)
            self._client = pymongo.MongoClient(self.host, self.port, **options)

        return self._client[self.db][self.collection]

    def find_one(self, query, retries=0):
        """
        ``find_one`` against the configured collection.

        ``AutoReconnect`` and ``OperationFailure`` are retried up to
        ``max_retries`` times, sleeping ``retry_delay`` seconds in between;
        after that ``ConnectionFailure`` is raised.
        """
        try:
            return self._connect_to_db().find_one(query)

        except (AutoReconnect, OperationFailure) as error_message:
            retries += 1
            if retries > self.max_retries:
                raise ConnectionFailure('Max number of retries (%s) reached. Error: %s'
                                        % (self.max_retries, error_message))

            logger.warning('MongoDB query failed (%s), retry %s of %s',
                           error_message, retries, self.max_retries)
            time.sleep(self.retry_delay)
            return self.find_one(query, retries=retries)

    def close(self):
        if self._client is not None:
            self._client.close()
            self._client = None
