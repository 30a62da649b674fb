#!/usr/bin/env python
try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

import phishcamp

setup(name='phishcamp',
        version=phishcamp.__version__,
        description='Detect email phishing campaigns by clustering enriched phishing URLs',
        author=phishcamp.__author__,
        author_email=phishcamp.__author_email__,
        packages=['phishcamp', 'phishcamp.utils', 'phishcamp.data',
                  'phishcamp.management', 'phishcamp.management.commands'],
        package_data={'phishcamp.data': ['error_phrases.txt']},
        python_requires='>=3.9',
        install_requires=[
            'pymongo',
            'numpy',
            'scipy',
            'scikit-learn>=1.0',
            'networkx>=2.8',
            'pandas',
            'matplotlib',
        ],
        extras_require={
            'test': ['pytest', 'hypothesis'],
        },
        entry_points={
            'console_scripts': ['phishcamp = phishcamp.cli:main'],
        },
        license=phishcamp.__license__,
        classifiers=[
            'Environment :: Console',
            'Intended Audience :: Information Technology',
            'Operating System :: OS Independent',
            'Programming Language :: Python :: 3',
            'Topic :: Security',
            'Topic :: Utilities'
        ],
)
