#!/usr/bin/env python
import warnings
##
# phishcamp
##
__title__ = 'phishcamp'
__version__ = '0.1.0'
__author__ = 'phishcamp contributors'
__license__ = 'MIT'
__author_email__ = []
__contributors__ = []

try:
    from phishcamp.ingest import enrich, load_dataset
    from phishcamp.report import PipelineConfig, run_pipeline
    from phishcamp.synth import SynthSpec, generate
except ImportError as e:
    warnings.warn(str(e))
