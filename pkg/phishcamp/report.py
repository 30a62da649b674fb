"""
report.py

Pipeline orchestration: configuration, the stage sequence from ingest to
metrics, the layer comparison table and every file the pipeline writes.
"""
from __future__ import annotations

import contextlib
import dataclasses
import datetime
import json
import logging
import os
import platform
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Union

import pandas as pd
from sklearn.metrics import adjusted_rand_score

from phishcamp.campaign import (DEFAULT_CUT_DISTANCE, DEFAULT_LINKAGE, LINKAGE_METHODS,
                                ComponentIndex, assemble_campaigns, build_component_index,
                                cluster_components, fit_long_doc_model)
from phishcamp.community import (DEFAULT_EXACT_MAX_NODES, DEFAULT_RESOLUTION,
                                 DEFAULT_ZERO_WEIGHT_EPS, LabeledUrlGraph, detect_all)
from phishcamp.exceptions import (DatasetMismatch, IncorrectParameters, InputError,
                                  ParseError, StageError)
from phishcamp.graph import build_bipartite, export_graphs, project_url_graphs
from phishcamp.ingest import (DEFAULT_ERROR_TOKEN_THRESHOLD, EnrichmentStats,
                              FixtureEnrichmentClient, MongoEnrichmentClient, drop_error_records,
                              enrich, load_dataset, load_error_dictionary)
from phishcamp.metrics import (DEFAULT_COHERENCE_EPS, DEFAULT_COHMAP_THRESHOLD, coherence_map,
                               signal_strength_table, with_signal_strengths, write_cohmap_csv,
                               write_cohmap_svg, write_sigs_csv)
from phishcamp.model import (ALL_SIGNALS, Campaign, CampaignComponent, TfidfModel,
                             WeightedUrlGraph, parse_signals, records_by_url, sorted_signals)
from phishcamp.structural import (DEFAULT_STRUCTURAL_THRESHOLD, compose_layers,
                                  structural_campaigns, structural_clusters)
from phishcamp.textsim import DEFAULT_OCR_SIM_THRESHOLD
from phishcamp.utils.convert import Serializer
from phishcamp.weighting import (DEFAULT_DELTA, DEFAULT_DELTA_IP, WeightingConfig,
                                 build_signal_texts, weigh_graphs)

logger = logging.getLogger(__name__)

LAYERS = ('structural', 'contextual', 'both')
CONTEXTUAL_SCOPES = ('global', 'per-structural-cluster')

CAMPAIGNS_FILE = 'campaigns.json'
SIGS_FILE = 'sigs.csv'
COHMAP_FILE = 'cohmap.csv'
COHMAP_SVG_FILE = 'cohmap.svg'
COMPARISON_FILE = 'comparison.csv'
MANIFEST_FILE = 'run-manifest.json'
GRAPHS_DIR = 'graphs'

#: Artifacts ``run_pipeline`` can write.
ALL_OUTPUTS = frozenset(['campaigns', 'sigs', 'cohmap', 'graphs', 'comparison'])

TOP_SIGNALS = 7


@dataclass(frozen=True)
class PipelineConfig:
    """
    Every parameter of a run. ``to_dict`` is what the run manifest records.
    """
    #: JSON-lines dataset to read.
    input_path: str = None

    #: Directory every artifact is written to.
    output_dir: str = 'phishcamp-out'

    #: Textual similarity threshold.
    delta: float = DEFAULT_DELTA

    #: Shared-IP count above which the IP signal adds 2.
    delta_ip: int = DEFAULT_DELTA_IP

    #: Submission-time window, in hours.
    delta_time_hours: float = 72.0

    #: Active signal set.
    signals: FrozenSet = ALL_SIGNALS

    ocr_sim_threshold: float = DEFAULT_OCR_SIM_THRESHOLD

    #: Error-page dictionary file; the packaged dictionary when None.
    error_dictionary: Optional[str] = None

    error_token_threshold: float = DEFAULT_ERROR_TOKEN_THRESHOLD

    #: Drop single-letter word tokens.
    drop_short_tokens: bool = True

    #: Drop ``http``, ``https`` and ``www`` url tokens.
    drop_url_scheme: bool = False

    #: Drop records whose page texts are all error pages before building graphs.
    drop_all_error_text: bool = False

    structural_threshold: float = DEFAULT_STRUCTURAL_THRESHOLD

    #: Which layers produce the final campaigns.
    layers: str = 'both'

    #: Run contextual detection over all URLs, or inside each structural cluster.
    contextual_scope: str = 'global'

    cut_distance: float = DEFAULT_CUT_DISTANCE
    linkage: str = DEFAULT_LINKAGE
    resolution: float = DEFAULT_RESOLUTION
    community_seed: int = 0
    zero_weight_eps: float = DEFAULT_ZERO_WEIGHT_EPS

    #: Graphs up to this many nodes get an exact modularity search.
    exact_max_nodes: int = DEFAULT_EXACT_MAX_NODES

    coherence_eps: float = DEFAULT_COHERENCE_EPS
    cohmap_threshold: float = DEFAULT_COHMAP_THRESHOLD
    emit_svg: bool = False

    #: Graph export targets. True writes into ``<output_dir>/graphs``, a
    #: string names the directory.
    export_dot: Union[bool, str] = False
    export_graphml: Union[bool, str] = False

    #: Directory of enrichment fixtures.
    enrichment_dir: Optional[str] = None

    #: MongoDB enrichment source, used when ``mongo_collection`` is set.
    mongo_host: str = 'localhost'
    mongo_port: int = 27017
    mongo_db: str = 'phishcamp'
    mongo_collection: Optional[str] = None
    mongo_retries: int = 2

    #: Worker threads for enrichment lookups.
    max_workers: int = 4

    #: Ground-truth file (url -> campaign id); its ARI goes into the manifest.
    truth_path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'signals', parse_signals(self.signals))
        if self.layers not in LAYERS:
            raise IncorrectParameters('layers must be one of %s, got %r' % (', '.join(LAYERS), self.layers))
        if self.contextual_scope not in CONTEXTUAL_SCOPES:
            raise IncorrectParameters('contextual scope must be one of %s, got %r'
                                      % (', '.join(CONTEXTUAL_SCOPES), self.contextual_scope))
        if self.linkage not in LINKAGE_METHODS:
            raise IncorrectParameters('linkage must be one of %s, got %r'
                                      % (', '.join(LINKAGE_METHODS), self.linkage))
        if self.resolution <= 0 or self.zero_weight_eps <= 0 or self.coherence_eps <= 0:
            raise IncorrectParameters('resolution, zero_weight_eps and coherence_eps must be positive.')
        if self.exact_max_nodes < 0:
            raise IncorrectParameters('exact_max_nodes cannot be negative.')
        if self.delta_time_hours <= 0:
            raise IncorrectParameters('delta_time_hours must be positive.')
        # fails early on bad weighting thresholds
        self.weighting()

    @classmethod
    def from_options(cls, options: Mapping) -> 'PipelineConfig':
        """
        Build a config from parsed command line options; options that are not
        config fields or were left unset are ignored.
        """
        names = {config_field.name for config_field in dataclasses.fields(cls)}
        values = {name: value for name, value in options.items() if name in names and value is not None}
        return cls(**values)

    def weighting(self) -> WeightingConfig:
        return WeightingConfig(delta=self.delta, delta_ip=self.delta_ip,
                               delta_time=datetime.timedelta(hours=self.delta_time_hours),
                               active_signals=self.signals)

    def to_dict(self):
        document = dataclasses.asdict(self)
        document['signals'] = [str(signal) for signal in sorted_signals(self.signals)]
        return document

    def path(self, name):
        return os.path.join(self.output_dir, name)

    def graph_dir(self, target):
        if not target:
            return None
        return self.path(GRAPHS_DIR) if target is True else target


@dataclass
class ContextualResult:
    """
    Everything the contextual layer produced.
    """
    weighted_graphs: List[WeightedUrlGraph] = field(default_factory=list)
    lawu_graphs: List[LabeledUrlGraph] = field(default_factory=list)
    index: ComponentIndex = field(default_factory=ComponentIndex)
    comp_lbls: List[int] = field(default_factory=list)
    campaigns: List[Campaign] = field(default_factory=list)
    long_doc_model: Optional[TfidfModel] = None


@dataclass
class RunArtifacts:
    """
    Paths written by a run plus the in-memory results behind them.
    """
    paths: Dict[str, str] = field(default_factory=dict)
    campaigns: List[Campaign] = field(default_factory=list)
    structural: List[Campaign] = field(default_factory=list)
    contextual: Optional[ContextualResult] = None
    signal_table: object = None
    cohmap: object = None
    comparison: Optional[pd.DataFrame] = None
    manifest: Dict = field(default_factory=dict)


@contextlib.contextmanager
def _stage(name, timings):
    """
    Log a stage and attach its name to any error escaping it.
    """
    logger.info('Stage %s started', name)
    started = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as error:
        logger.error('Stage %s failed: %s', name, error)
        raise StageError(name, error) from error
    elapsed = time.perf_counter() - started
    timings[name] = round(elapsed, 3)
    logger.info('Stage %s finished in %.2fs', name, elapsed)


def build_url_graphs(records, clusters=None) -> List[WeightedUrlGraph]:
    """
    Unweighted URL graphs over all records, or inside each structural cluster
    when ``clusters`` is given. Graph ids stay dense.
    """
    if clusters is None:
        return project_url_graphs(build_bipartite(records))

    by_url = records_by_url(records)
    graphs = []
    for cluster in clusters:
        subset = [by_url[url] for url in sorted(cluster)]
        for graph in project_url_graphs(build_bipartite(subset)):
            graphs.append(dataclasses.replace(graph, graph_id=len(graphs)))
    return graphs


def run_contextual(records, config: PipelineConfig, dictionary, timings=None,
                   clusters: Sequence[FrozenSet[str]] = None) -> ContextualResult:
    """
    The contextual layer: URL graphs, weighting, community detection,
    component indexing, clustering and campaign assembly.

    With ``clusters`` graphs are built and components clustered inside each
    structural cluster only.
    """
    timings = timings if timings is not None else {}
    result = ContextualResult()
    if not records:
        return result

    by_url = records_by_url(records)

    with _stage('graph', timings):
        graphs = build_url_graphs(records, clusters)

    with _stage('weighting', timings):
        texts = build_signal_texts(records, dictionary, config.ocr_sim_threshold,
                                   drop_short=config.drop_short_tokens)
        result.weighted_graphs = weigh_graphs(graphs, by_url, config.weighting(), texts)

    with _stage('community', timings):
        result.lawu_graphs = detect_all(result.weighted_graphs, seed=config.community_seed,
                                        resolution=config.resolution,
                                        zero_weight_eps=config.zero_weight_eps,
                                        exact_max_nodes=config.exact_max_nodes)

    with _stage('components', timings):
        result.index = build_component_index(result.lawu_graphs, by_url, dictionary,
                                             config.ocr_sim_threshold,
                                             drop_short=config.drop_short_tokens)
        result.long_doc_model = fit_long_doc_model(result.index, drop_short=config.drop_short_tokens)

    with _stage('clustering', timings):
        groups = None
        if clusters is not None:
            cluster_of = {url: number for number, cluster in enumerate(clusters) for url in cluster}
            grouped = {}
            for gid in range(len(result.index)):
                component = result.index.component(gid)
                grouped.setdefault(cluster_of[min(component.urls)], []).append(gid)
            groups = [grouped[number] for number in sorted(grouped)]
        result.comp_lbls = cluster_components(result.index, config.cut_distance, config.linkage,
                                              model=result.long_doc_model,
                                              drop_short=config.drop_short_tokens, groups=groups)
        result.campaigns = assemble_campaigns(result.index, result.comp_lbls)

    return result


def _bucket(size):
    return '>5' if size > 5 else str(size)


def layer_counts(groups) -> Dict[str, int]:
    """
    Campaign counts by URL count: total, single-URL, 2..5 and >5 URLs, and
    all multi-URL campaigns.
    """
    sizes = [len(getattr(group, 'urls', group)) for group in groups]
    counts = {'total': len(sizes), 'single': sum(1 for size in sizes if size == 1)}
    for bucket in ('2', '3', '4', '5', '>5'):
        counts[bucket] = sum(1 for size in sizes if size > 1 and _bucket(size) == bucket)
    counts['multi_total'] = sum(1 for size in sizes if size > 1)
    return counts


COMPARISON_COLUMNS = ('total', 'single', '2', '3', '4', '5', '>5', 'multi_total')


def _reduction(before, after):
    difference = before - after
    percent = int(round(100.0 * difference / before)) if before else 0
    return '%s (%s%%)' % (difference, percent)


def compare_layers(structural, combined) -> pd.DataFrame:
    """
    Campaign counts of the structural and the combined layer and the
    reduction between them, one row each.
    """
    structural_urls = frozenset().union(*(getattr(group, 'urls', group) for group in structural))
    combined_urls = frozenset().union(*(getattr(group, 'urls', group) for group in combined))
    if structural_urls != combined_urls:
        raise DatasetMismatch('The two runs cover different URLs (%s vs %s).'
                              % (len(structural_urls), len(combined_urls)))

    before, after = layer_counts(structural), layer_counts(combined)
    rows = [
        dict(layer='structural', **{column: before[column] for column in COMPARISON_COLUMNS}),
        dict(layer='combined', **{column: after[column] for column in COMPARISON_COLUMNS}),
        dict(layer='reduction', **{column: _reduction(before[column], after[column])
                                   for column in COMPARISON_COLUMNS}),
    ]
    return pd.DataFrame.from_records(rows, columns=('layer', ) + COMPARISON_COLUMNS)


def evaluate_against_truth(campaigns, truth: Mapping[str, int]) -> float:
    """
    Adjusted Rand index of the campaigns against a url -> label ground truth.
    """
    predicted = {}
    for number, campaign in enumerate(campaigns):
        for url in getattr(campaign, 'urls', campaign):
            predicted[url] = number
    if set(predicted) != set(truth):
        raise DatasetMismatch('Ground truth covers %s URLs, campaigns cover %s.'
                              % (len(truth), len(predicted)))
    urls = sorted(truth)
    return float(adjusted_rand_score([truth[url] for url in urls], [predicted[url] for url in urls]))


def campaign_to_dict(campaign: Campaign):
    return {
        'campaign_id': campaign.campaign_id,
        'urls': sorted(campaign.urls),
        'components': [{'graph_id': component.graph_id, 'label': component.label,
                        'gid': component.gid, 'urls': sorted(component.urls)}
                       for component in sorted(campaign.components, key=lambda component: component.key)],
        'sigs': {str(signal): value for signal, value in campaign.sigs.items()},
        'avg_sigs': campaign.avg_sigs,
        'top_signals': [str(signal) for signal, _ in campaign.top_signals(TOP_SIGNALS)],
        'lineage': {'structural_cluster_ids': list(campaign.structural_cluster_ids),
                    'contextual_campaign_ids': list(campaign.contextual_campaign_ids)},
    }


def write_json(document, path):
    with open(path, 'w', encoding='utf-8') as json_file_obj:
        json.dump(Serializer().convert(document), json_file_obj, indent=2, sort_keys=True,
                  ensure_ascii=False)
        json_file_obj.write('\n')


def write_campaigns(campaigns, path):
    write_json([campaign_to_dict(campaign)
                for campaign in sorted(campaigns, key=lambda campaign: campaign.campaign_id)], path)


def load_campaigns(path) -> List[Campaign]:
    """
    Read a campaigns file back; signal strengths and LongDocs are not
    restored.
    """
    try:
        with open(path, 'r', encoding='utf-8') as campaigns_file_obj:
            documents = json.load(campaigns_file_obj)
    except ValueError as error:
        raise ParseError('%s is not valid JSON: %s' % (path, error))
    if not isinstance(documents, list):
        raise ParseError('%s is not a campaigns file: expected a list of campaigns' % path)

    campaigns = []
    try:
        for document in documents:
            components = tuple(CampaignComponent(graph_id=item['graph_id'], label=item['label'],
                                                 urls=item['urls'], gid=item.get('gid'))
                               for item in document.get('components', ()))
            lineage = document.get('lineage', {})
            campaigns.append(Campaign(campaign_id=document['campaign_id'], components=components,
                                      urls=document['urls'],
                                      structural_cluster_ids=tuple(lineage.get('structural_cluster_ids', ())),
                                      contextual_campaign_ids=tuple(lineage.get('contextual_campaign_ids', ()))))
    except (AttributeError, KeyError, TypeError) as error:
        raise ParseError('%s is not a campaigns file: %s' % (path, error))
    return campaigns


def _versions():
    import matplotlib
    import networkx
    import numpy
    import pymongo
    import scipy
    import sklearn

    import phishcamp

    return {
        'phishcamp': phishcamp.__version__,
        'python': platform.python_version(),
        'numpy': numpy.__version__,
        'scipy': scipy.__version__,
        'scikit-learn': sklearn.__version__,
        'networkx': networkx.__version__,
        'pandas': pd.__version__,
        'matplotlib': matplotlib.__version__,
        'pymongo': pymongo.version,
    }


def _enrichment_client(config):
    if config.mongo_collection:
        from phishcamp.db import Connection

        connection = Connection(host=config.mongo_host, port=config.mongo_port, db=config.mongo_db,
                                collection=config.mongo_collection, max_retries=config.mongo_retries)
        return MongoEnrichmentClient(connection)
    if config.enrichment_dir:
        return FixtureEnrichmentClient(config.enrichment_dir)
    return None


def prepare_records(config: PipelineConfig, dictionary, timings, manifest):
    """
    Load, enrich and filter the dataset.
    """
    with _stage('ingest', timings):
        records = load_dataset(config.input_path, drop_url_scheme=config.drop_url_scheme)
        manifest['counts']['loaded'] = len(records)

        client = _enrichment_client(config)
        if client is not None:
            stats = EnrichmentStats()
            try:
                records = enrich(records, client, stats, max_workers=config.max_workers)
            finally:
                if isinstance(client, MongoEnrichmentClient):
                    client.connection.close()
            manifest['enrichment'] = dataclasses.asdict(stats)

        if config.drop_all_error_text:
            records = drop_error_records(records, dictionary)
        manifest['counts']['records'] = len(records)
    return records


def run_pipeline(config: PipelineConfig, outputs=ALL_OUTPUTS) -> RunArtifacts:
    """
    Run every stage on ``config.input_path`` and write the requested outputs
    plus the run manifest into ``config.output_dir``.
    """
    if not config.input_path:
        raise IncorrectParameters('No input dataset given.')

    os.makedirs(config.output_dir, exist_ok=True)
    timings = {}
    artifacts = RunArtifacts()
    manifest = artifacts.manifest
    manifest.update(params=config.to_dict(), versions=_versions(), timings=timings,
                    counts={}, warnings=[])

    with _stage('dictionary', timings):
        dictionary = load_error_dictionary(config.error_dictionary, config.error_token_threshold)

    records = prepare_records(config, dictionary, timings, manifest)
    if not records:
        logger.warning('The dataset %s holds no records; writing empty outputs.', config.input_path)
        manifest['warnings'].append('empty dataset')

    with _stage('structural', timings):
        clusters = structural_clusters(records, config.structural_threshold) if records else []
        artifacts.structural = structural_campaigns(clusters)

    if config.layers == 'structural':
        artifacts.campaigns = artifacts.structural
    else:
        scope = clusters if config.contextual_scope == 'per-structural-cluster' else None
        artifacts.contextual = run_contextual(records, config, dictionary, timings, clusters=scope)
        if config.layers == 'contextual':
            artifacts.campaigns = artifacts.contextual.campaigns
        else:
            with _stage('compose', timings):
                artifacts.campaigns = compose_layers(clusters, artifacts.contextual.campaigns)

    contextual = artifacts.contextual
    with _stage('metrics', timings):
        if contextual is not None:
            artifacts.signal_table = signal_strength_table(artifacts.campaigns, contextual.weighted_graphs,
                                                           config.signals)
            artifacts.campaigns = with_signal_strengths(artifacts.campaigns, artifacts.signal_table)

        if contextual is not None and len(artifacts.campaigns) >= 2 and 'cohmap' in outputs:
            artifacts.cohmap = coherence_map(artifacts.campaigns, contextual.long_doc_model,
                                             config.coherence_eps, config.cohmap_threshold)
            manifest['cohmap'] = artifacts.cohmap.summary()
        elif 'cohmap' in outputs:
            logger.warning('Skipping the coherence map: it needs at least 2 contextual campaigns.')
            manifest['warnings'].append('coherence map skipped')

        if config.layers == 'both':
            artifacts.comparison = compare_layers(artifacts.structural, artifacts.campaigns)

    manifest['counts'].update(structural_clusters=len(artifacts.structural),
                              campaigns=len(artifacts.campaigns))
    if contextual is not None:
        manifest['counts'].update(graphs=len(contextual.weighted_graphs), components=len(contextual.index),
                                  contextual_campaigns=len(contextual.campaigns))

    if config.truth_path:
        from phishcamp.synth import load_truth

        manifest['ari'] = evaluate_against_truth(artifacts.campaigns, load_truth(config.truth_path))
        logger.info('Adjusted Rand index against %s: %.4f', config.truth_path, manifest['ari'])

    with _stage('report', timings):
        _write_outputs(config, artifacts, outputs)
        artifacts.paths['manifest'] = config.path(MANIFEST_FILE)
        write_json(manifest, artifacts.paths['manifest'])

    return artifacts


def _write_outputs(config, artifacts, outputs):
    paths = artifacts.paths

    if 'campaigns' in outputs:
        paths['campaigns'] = config.path(CAMPAIGNS_FILE)
        write_campaigns(artifacts.campaigns, paths['campaigns'])

    if 'sigs' in outputs and artifacts.signal_table is not None:
        paths['sigs'] = config.path(SIGS_FILE)
        write_sigs_csv(artifacts.signal_table, paths['sigs'])

    if 'cohmap' in outputs and artifacts.cohmap is not None:
        paths['cohmap'] = config.path(COHMAP_FILE)
        write_cohmap_csv(artifacts.cohmap, paths['cohmap'])
        if config.emit_svg:
            paths['cohmap_svg'] = config.path(COHMAP_SVG_FILE)
            write_cohmap_svg(artifacts.cohmap, paths['cohmap_svg'])

    if 'comparison' in outputs and artifacts.comparison is not None:
        paths['comparison'] = config.path(COMPARISON_FILE)
        artifacts.comparison.to_csv(paths['comparison'], index=False, encoding='utf-8')

    contextual = artifacts.contextual
    if 'graphs' in outputs and contextual is not None and (config.export_dot or config.export_graphml):
        dot_dir = config.graph_dir(config.export_dot)
        graphml_dir = config.graph_dir(config.export_graphml)
        labels = {lawu.graph_id: lawu.labels for lawu in contextual.lawu_graphs}
        written = export_graphs(contextual.weighted_graphs,
                                dot_dir=dot_dir,
                                graphml_dir=graphml_dir,
                                labels=labels)
        paths['graphs'] = dot_dir or graphml_dir
        if graphml_dir and graphml_dir != paths['graphs']:
            paths['graphs_graphml'] = graphml_dir
        artifacts.manifest['graph_files'] = len(written)


def exit_code_for(error: BaseException) -> int:
    """
    2 for input errors and unreadable files, 3 for everything else.
    """
    if isinstance(error, StageError):
        error = error.error
    return 2 if isinstance(error, (InputError, OSError)) else 3
