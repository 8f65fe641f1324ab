"""
SpreadCore - Central orchestrator for influence-spread computations
Loads configuration, splits graphs into components, picks orderings, enforces
the width guard and implements every launcher subcommand
"""

import copy
import json
import logging
import math
import os
import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from dotenv import load_dotenv

from all_targets import AllTargetsSolver
from edge_ordering import (EdgeOrdering, PathDecomposition, compute_frontiers, heuristic_ordering,
                           ordering_from_decomposition, parse_edge_order, parse_path_decomposition,
                           restrict_order)
from errors import GraphFormatError, SeedError, SpreadError, WidthGuardError
from generators import FAMILIES, generate, random_seeds, random_small_graph
from oracle import RNG_ALGORITHM, brute_force, monte_carlo
from reporting import RunReport, host_info
from single_target import SingleTargetSolver
from uncertain_graph import (SeedSet, SpreadResult, UncertainDigraph, assemble_spread, parse_graph,
                             split_components)

DEFAULT_CONFIG: Dict[str, Dict] = {
    'engine': {
        'max_width': 8,
        'state_bound_factor': 4,
        'check_state_bound': True,
        'mass_tolerance': 1e-9,
        'drop_zero_edges': False,
    },
    'oracle': {
        'max_edges': 24,
        'block_bits': 16,
        'mc_samples': 100000,
        'mc_batch': 10000,
        'rng_seed': 12345,
    },
    'verify': {
        'trials': 100,
        'min_vertices': 2,
        'max_vertices': 8,
        'max_edges': 14,
        'pendant_every': 5,
        'tolerance': 1e-10,
        'baseline_tolerance': 1e-12,
    },
    'bench': {
        'family': 'path',
        'sizes': [1000, 2000, 4000],
        'baseline_max_edges': 2000,
        'repeats': 1,
        'ladder_widths': [1, 2, 3],
        'random_width': 2,
    },
    'greedy': {
        'k': 1,
    },
    'report': {
        'format': 'json',
    },
    'logging': {
        'level': 'INFO',
        'file': 'spread.log',
    },
}


def load_config(path: Optional[str] = None) -> Dict:
    """
    Load config.json merged over defaults, then apply environment overrides

    SPREAD_MAX_WIDTH, SPREAD_LOG_LEVEL and SPREAD_RNG_SEED are read after
    load_dotenv(), so a local .env file works too.

    Args:
        path: Optional config path; defaults to config.json next to this file

    Returns:
        Dict: Complete configuration
    """
    config = copy.deepcopy(DEFAULT_CONFIG)
    config_path = Path(path) if path else Path(__file__).parent / "config.json"
    if config_path.exists():
        with open(config_path, 'r') as f:
            loaded = json.load(f)
        for section, values in loaded.items():
            if isinstance(values, dict):
                config.setdefault(section, {}).update(values)
    elif path:
        raise SpreadError(f"config file not found: {path}")

    load_dotenv()
    if os.getenv('SPREAD_MAX_WIDTH'):
        config['engine']['max_width'] = int(os.environ['SPREAD_MAX_WIDTH'])
    if os.getenv('SPREAD_LOG_LEVEL'):
        config['logging']['level'] = os.environ['SPREAD_LOG_LEVEL'].upper()
    if os.getenv('SPREAD_RNG_SEED'):
        config['oracle']['rng_seed'] = int(os.environ['SPREAD_RNG_SEED'])
    return config


def read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding='utf-8')
    except UnicodeDecodeError as e:
        raise GraphFormatError(f"{what} file {path} is not valid UTF-8 (byte offset {e.start})")
    except OSError as e:
        raise SpreadError(f"cannot read {what} file {path}: {e.strerror}")


class SpreadCore:
    """
    Orchestrates the pipelines behind every subcommand

    Whole-graph requests are split into weakly connected components; each
    component with a seed gets its own ordering and diagrams, the others
    contribute zeros.
    """

    def __init__(self, config: Dict):
        """
        Initialize core with configuration

        Args:
            config: Complete configuration dictionary
        """
        self.config = config
        self.engine_config = config.get('engine', {})
        self.max_width = self.engine_config.get('max_width', 8)
        self.drop_zero_edges = self.engine_config.get('drop_zero_edges', False)
        self.solver = AllTargetsSolver(self.engine_config)
        self.baseline = SingleTargetSolver(self.engine_config)
        self.logger = logging.getLogger(__name__)

    # Input loading

    def load_graph(self, graph_path: str) -> UncertainDigraph:
        return parse_graph(read_text(graph_path, 'graph'))

    def load_inputs(self, graph_path: str, seeds_text: Optional[str], pathdec_path: Optional[str] = None,
                    order_path: Optional[str] = None) -> Tuple[UncertainDigraph, Optional[SeedSet],
                                                               Optional[PathDecomposition], Optional[List[int]]]:
        """
        Read graph, seeds and the optional decomposition or edge order

        Returns:
            (graph, seeds or None, path decomposition or None, edge order or None)
        """
        graph = self.load_graph(graph_path)
        seeds = SeedSet.parse(graph, seeds_text) if seeds_text is not None else None
        pd = None
        order = None
        if pathdec_path:
            pd = parse_path_decomposition(read_text(pathdec_path, 'path decomposition'), graph)
            pd.validate(graph)
        if order_path:
            order = parse_edge_order(read_text(order_path, 'edge order'), graph)
        return graph, seeds, pd, order

    # Orderings

    def component_ordering(self, component, pd: Optional[PathDecomposition],
                           order: Optional[List[int]]) -> EdgeOrdering:
        """Ordering for one component, restricted from the whole-graph inputs when given"""
        graph = component.graph
        if order is not None:
            ordering = compute_frontiers(graph, restrict_order(order, component))
        elif pd is not None:
            ordering = ordering_from_decomposition(graph, pd.restrict(component))
        else:
            ordering = heuristic_ordering(graph)
        self.check_width(ordering)
        return ordering

    def check_width(self, ordering: EdgeOrdering):
        if ordering.omega > self.max_width:
            raise WidthGuardError(ordering.omega, self.max_width)

    # Pipelines

    def compute_spread(self, graph: UncertainDigraph, seeds: SeedSet, pd: Optional[PathDecomposition] = None,
                       order: Optional[List[int]] = None, stats: Optional[Dict] = None,
                       orderings: Optional[Dict] = None, dump=None) -> SpreadResult:
        """
        All-targets pipeline over every component

        Args:
            graph: Whole graph
            seeds: Seed set
            pd: Optional whole-graph path decomposition
            order: Optional whole-graph edge order
            stats: Optional dict receiving omega, peak sizes and timings
            orderings: Optional cache of component orderings keyed by vertex tuple
            dump: Optional text stream receiving diagram dumps

        Returns:
            SpreadResult
        """
        seeds.validate(graph)
        # an explicit order indexes the original edge list
        if self.drop_zero_edges and order is None:
            graph = graph.without_zero_edges()
        per_vertex: Dict[int, float] = {}
        omega = 0
        peak_stc = 0
        peak_tc = 0
        timings: Dict[str, float] = {}
        mass_error = 0.0

        for component in split_components(graph, seeds):
            if not component.has_seeds:
                for v in component.vertices:
                    per_vertex[v] = 0.0
                continue
            if component.graph.m == 0:
                continue
            if orderings is not None and component.vertices in orderings:
                ordering = orderings[component.vertices]
            else:
                ordering = self.component_ordering(component, pd, order)
                if orderings is not None:
                    orderings[component.vertices] = ordering
            omega = max(omega, ordering.omega)

            self.solver.keep_diagrams = dump is not None
            run = self.solver.solve(component.graph, ordering, component.seeds)
            if dump is not None and run.diagrams is not None:
                dump.write(f"# component of vertices {component.vertices[0]}..{component.vertices[-1]}\n")
                run.diagrams.dump(dump)
            for local, p in run.probs.items():
                per_vertex[component.vertices[local]] = p
            peak_stc = max(peak_stc, max(run.stc_sizes, default=0))
            peak_tc = max(peak_tc, max(run.tc_sizes, default=0))
            mass_error = max(mass_error, run.max_mass_error)
            for phase, seconds in run.timings.items():
                timings[phase] = timings.get(phase, 0.0) + seconds

        if stats is not None:
            stats.update(omega=omega, peak_stc=peak_stc, peak_tc=peak_tc, timings=timings,
                         max_mass_error=mass_error)
        return assemble_spread(per_vertex, seeds, graph.n)

    def single_probability(self, graph: UncertainDigraph, seeds: SeedSet, target: int,
                           pd: Optional[PathDecomposition] = None, order: Optional[List[int]] = None,
                           stats: Optional[Dict] = None, dump=None) -> float:
        """Baseline P(S ~> target) on the target's component"""
        seeds.validate(graph)
        if target in seeds:
            raise SeedError(f"target {graph.labels[target]} is a seed")
        for component in split_components(graph, seeds):
            if target not in component.vertices:
                continue
            if not component.has_seeds or component.graph.m == 0:
                return 0.0
            ordering = self.component_ordering(component, pd, order)
            local = component.vertices.index(target)
            p = self.baseline.probability(component.graph, ordering, component.seeds, local)
            diagram = self.baseline.last_diagram
            if stats is not None and diagram is not None:
                stats.update(omega=ordering.omega, levels=len(diagram.levels),
                             peak_tc=diagram.peak_states, total_tc=diagram.total_states)
            if dump is not None and diagram is not None:
                diagram.dump(dump)
            return p
        raise SeedError(f"target {target} is not a vertex of the graph")

    def baseline_spread(self, graph: UncertainDigraph, seeds: SeedSet,
                        pd: Optional[PathDecomposition] = None, order: Optional[List[int]] = None) -> SpreadResult:
        """Per-vertex baseline: one TC diagram per non-seed vertex"""
        seeds.validate(graph)
        per_vertex: Dict[int, float] = {}
        for component in split_components(graph, seeds):
            if not component.has_seeds or component.graph.m == 0:
                for v in component.vertices:
                    per_vertex[v] = 0.0
                continue
            ordering = self.component_ordering(component, pd, order)
            probs = self.baseline.all_probabilities(component.graph, ordering, component.seeds)
            for local, p in probs.items():
                per_vertex[component.vertices[local]] = p
        return assemble_spread(per_vertex, seeds, graph.n)

    # Subcommands

    def _base_report(self, command: str, graph: UncertainDigraph, seeds: Optional[SeedSet],
                     pd: Optional[PathDecomposition]) -> RunReport:
        return RunReport(
            command=command,
            n=graph.n,
            m=graph.m,
            pathwidth=pd.width if pd is not None else None,
            seeds=[graph.labels[s] for s in seeds] if seeds is not None else [],
            host=host_info(),
        )

    def _fill_spread(self, report: RunReport, graph: UncertainDigraph, result: SpreadResult):
        report.probs = {graph.labels[v]: p for v, p in sorted(result.probs.items())}
        report.sigma = result.sigma
        report.include_seeds_sigma = result.include_seeds_sigma

    def cmd_spread(self, graph: UncertainDigraph, seeds: SeedSet, pd: Optional[PathDecomposition] = None,
                   order: Optional[List[int]] = None, dump=None) -> RunReport:
        """Exact per-vertex probabilities and sigma(S) with the all-targets pipeline"""
        stats: Dict = {}
        start = time.perf_counter()
        result = self.compute_spread(graph, seeds, pd, order, stats=stats, dump=dump)
        report = self._base_report('spread', graph, seeds, pd)
        self._fill_spread(report, graph, result)
        report.omega = stats.get('omega')
        report.peak_states = {'stc': stats.get('peak_stc', 0), 'tc': stats.get('peak_tc', 0)}
        report.timings = dict(stats.get('timings', {}))
        report.timings['total'] = time.perf_counter() - start
        report.deltas = {'max_mass_error': stats.get('max_mass_error', 0.0)}
        self.logger.info(f"sigma(S) = {result.sigma:.12g} over {graph.n} vertices")
        return report

    def cmd_single(self, graph: UncertainDigraph, seeds: SeedSet, target: int,
                   pd: Optional[PathDecomposition] = None, order: Optional[List[int]] = None,
                   dump=None) -> RunReport:
        """One probability with the per-target diagram"""
        stats: Dict = {}
        start = time.perf_counter()
        p = self.single_probability(graph, seeds, target, pd, order, stats=stats, dump=dump)
        report = self._base_report('single', graph, seeds, pd)
        report.probs = {graph.labels[target]: p}
        report.omega = stats.get('omega')
        report.peak_states = {'tc': stats.get('peak_tc', 0)}
        report.meta = {'target': graph.labels[target], 'levels': stats.get('levels', 0),
                       'total_states': stats.get('total_tc', 0)}
        report.timings = {'total': time.perf_counter() - start}
        return report

    def cmd_oracle(self, graph: UncertainDigraph, seeds: SeedSet) -> RunReport:
        """Exhaustive enumeration over all edge subsets"""
        oracle_config = self.config.get('oracle', {})
        start = time.perf_counter()
        result = brute_force(graph, seeds.members, oracle_config.get('max_edges', 24),
                             oracle_config.get('block_bits', 16))
        report = self._base_report('oracle', graph, seeds, None)
        report.probs = {graph.labels[v]: p for v, p in sorted(result.probs.items())}
        report.sigma = result.sigma
        report.include_seeds_sigma = result.sigma + len(seeds)
        report.meta = {
            'subsets_evaluated': result.subsets_evaluated,
            'total_probability': result.total_probability,
            'contributing': {graph.labels[v]: c for v, c in sorted(result.contributing.items())},
        }
        report.timings = {'total': time.perf_counter() - start}
        return report

    def cmd_mc(self, graph: UncertainDigraph, seeds: SeedSet, samples: Optional[int] = None,
               rng_seed: Optional[int] = None) -> RunReport:
        """Monte-Carlo estimates with standard errors"""
        oracle_config = self.config.get('oracle', {})
        if samples is None:
            samples = oracle_config.get('mc_samples', 100000)
        if samples < 1:
            raise SpreadError(f"sample count must be at least 1, got {samples}")
        rng_seed = rng_seed if rng_seed is not None else oracle_config.get('rng_seed')
        start = time.perf_counter()
        result = monte_carlo(graph, seeds.members, samples, rng_seed, oracle_config.get('mc_batch', 10000))
        report = self._base_report('mc', graph, seeds, None)
        report.probs = {graph.labels[v]: p for v, p in sorted(result.estimates.items())}
        report.stderr = {graph.labels[v]: s for v, s in sorted(result.stderr.items())}
        report.sigma = result.sigma
        report.include_seeds_sigma = result.sigma + len(seeds)
        report.meta = {'samples': samples, 'rng_algorithm': result.rng_algorithm, 'rng_seed': rng_seed,
                       'sigma_stderr': result.sigma_stderr}
        report.timings = {'total': time.perf_counter() - start}
        return report

    def verify_graph(self, graph: UncertainDigraph, seeds: SeedSet, pd: Optional[PathDecomposition] = None,
                     order: Optional[List[int]] = None, mc_samples: int = 0,
                     rng_seed: Optional[int] = None) -> Dict[str, float]:
        """
        Cross-check all-targets against the baseline, brute force and optionally Monte Carlo

        Returns:
            Dict of max absolute deltas (brute force skipped above the edge guard)
        """
        oracle_config = self.config.get('oracle', {})
        fast = self.compute_spread(graph, seeds, pd, order)
        slow = self.baseline_spread(graph, seeds, pd, order)
        deltas = {'baseline': max((abs(fast.probs[v] - slow.probs[v]) for v in fast.probs), default=0.0)}
        max_edges = oracle_config.get('max_edges', 24)
        if graph.m <= max_edges:
            exact = brute_force(graph, seeds.members, max_edges, oracle_config.get('block_bits', 16))
            deltas['oracle'] = max((abs(fast.probs[v] - exact.probs[v]) for v in fast.probs), default=0.0)
        else:
            self.logger.warning(f"Skipping brute force: {graph.m} edges exceed the limit of {max_edges}")
        if mc_samples:
            mc = monte_carlo(graph, seeds.members, mc_samples, rng_seed, oracle_config.get('mc_batch', 10000))
            worst = 0.0
            for v, estimate in mc.estimates.items():
                err = mc.stderr[v]
                gap = abs(estimate - fast.probs[v])
                if err > 0:
                    worst = max(worst, gap / err)
                elif gap > 0:
                    worst = math.inf
            deltas['mc_stderrs'] = worst
        return deltas

    def cmd_verify(self, graph: Optional[UncertainDigraph] = None, seeds: Optional[SeedSet] = None,
                   pd: Optional[PathDecomposition] = None, order: Optional[List[int]] = None,
                   trials: Optional[int] = None, rng_seed: Optional[int] = None,
                   mc_samples: int = 0) -> RunReport:
        """
        Verify one graph, or a corpus of random small graphs when none is given

        Returns:
            RunReport whose deltas hold the maximum absolute differences
        """
        verify_config = self.config.get('verify', {})
        rng_seed = rng_seed if rng_seed is not None else self.config.get('oracle', {}).get('rng_seed')
        start = time.perf_counter()

        if graph is not None:
            if seeds is None:
                raise SeedError("verify on a graph file needs --seeds")
            report = self._base_report('verify', graph, seeds, pd)
            report.deltas = self.verify_graph(graph, seeds, pd, order, mc_samples, rng_seed)
            report.timings = {'total': time.perf_counter() - start}
            return report

        trials = trials or verify_config.get('trials', 100)
        rng = np.random.default_rng(rng_seed)
        pendant_every = verify_config.get('pendant_every', 5)
        worst: Dict[str, float] = {}
        rows = []
        for trial in range(trials):
            pendants = 1 if pendant_every and trial % pendant_every == pendant_every - 1 else 0
            g = random_small_graph(
                rng,
                (verify_config.get('min_vertices', 2), verify_config.get('max_vertices', 8)),
                (1, verify_config.get('max_edges', 14)),
                pendants=pendants,
                prob_choices=verify_config.get('prob_choices'),
            )
            s = SeedSet(random_seeds(g, rng))
            deltas = self.verify_graph(g, s)
            for key, value in deltas.items():
                worst[key] = max(worst.get(key, 0.0), value)
            rows.append({'trial': trial, 'n': g.n, 'm': g.m, **deltas})
        report = RunReport(command='verify', rows=rows, deltas=worst, host=host_info(),
                           meta={'trials': trials, 'rng_seed': rng_seed, 'rng_algorithm': RNG_ALGORITHM})
        report.timings = {'total': time.perf_counter() - start}
        self.logger.info(f"Verified {trials} random graphs: {worst}")
        return report

    def cmd_bench(self, family: Optional[str] = None, sizes: Optional[Iterable[int]] = None,
                  rng_seed: Optional[int] = None) -> RunReport:
        """
        Time all-targets against the per-vertex baseline over growing sizes

        The baseline is skipped above bench.baseline_max_edges. The ladder
        family is run once per configured width.
        """
        bench_config = self.config.get('bench', {})
        family = family or bench_config.get('family', 'path')
        if family not in FAMILIES:
            raise SpreadError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
        sizes = list(sizes or bench_config.get('sizes', [1000, 2000, 4000]))
        baseline_cap = bench_config.get('baseline_max_edges', 2000)
        repeats = max(1, bench_config.get('repeats', 1))
        widths = bench_config.get('ladder_widths', [2]) if family == 'ladder' else [bench_config.get('random_width', 2)]
        rng = np.random.default_rng(rng_seed if rng_seed is not None else self.config.get('oracle', {}).get('rng_seed'))

        rows = []
        for width in widths:
            for size in sizes:
                graph, pd = generate(family, size, rng=rng, width=width)
                seeds = SeedSet(frozenset({0}))
                ordering = ordering_from_decomposition(graph, pd, seeds.members)
                self.check_width(ordering)
                t_linear = min(self._timed(lambda: self.solver.solve(graph, ordering, seeds.members))
                               for _ in range(repeats))
                t_baseline = None
                if graph.m <= baseline_cap:
                    t_baseline = min(self._timed(lambda: self.baseline.all_probabilities(graph, ordering,
                                                                                         seeds.members))
                                     for _ in range(repeats))
                rows.append({'family': family, 'width': width, 'n': graph.n, 'm': graph.m,
                             'omega': ordering.omega, 't_linear': t_linear, 't_baseline': t_baseline})
                self.logger.info(f"bench {family} m={graph.m} omega={ordering.omega}: "
                                 f"linear {t_linear:.4f}s, baseline {t_baseline if t_baseline is None else round(t_baseline, 4)}")
        return RunReport(command='bench', rows=rows, host=host_info(),
                         meta={'family': family, 'baseline_max_edges': baseline_cap})

    @staticmethod
    def _timed(fn) -> float:
        start = time.perf_counter()
        fn()
        return time.perf_counter() - start

    def greedy_im(self, graph: UncertainDigraph, k: int, pd: Optional[PathDecomposition] = None,
                  order: Optional[List[int]] = None) -> List[Dict]:
        """
        Greedy seed selection with exact spread per candidate

        Maximises sigma(S) + |S|, ties to the smallest vertex id.

        Returns:
            Trace rows, one per added seed
        """
        if not (1 <= k <= graph.n):
            raise SeedError(f"k must be between 1 and n={graph.n}, got {k}")
        orderings: Dict = {}
        chosen: List[int] = []
        trace = []
        for step in range(1, k + 1):
            best_vertex = None
            best: Optional[SpreadResult] = None
            for v in range(graph.n):
                if v in chosen:
                    continue
                result = self.compute_spread(graph, SeedSet(frozenset(chosen + [v])), pd, order,
                                             orderings=orderings)
                if best is None or result.include_seeds_sigma > best.include_seeds_sigma + 1e-12:
                    best_vertex, best = v, result
            chosen.append(best_vertex)
            trace.append({'step': step, 'seed': graph.labels[best_vertex], 'sigma': best.sigma,
                          'include_seeds_sigma': best.include_seeds_sigma})
            self.logger.info(f"greedy step {step}: add {graph.labels[best_vertex]}, "
                             f"sigma={best.sigma:.12g}, with seeds={best.include_seeds_sigma:.12g}")
        return trace

    def cmd_greedy(self, graph: UncertainDigraph, k: Optional[int] = None,
                   pd: Optional[PathDecomposition] = None, order: Optional[List[int]] = None) -> RunReport:
        k = k or self.config.get('greedy', {}).get('k', 1)
        start = time.perf_counter()
        trace = self.greedy_im(graph, k, pd, order)
        report = self._base_report('greedy', graph, None, pd)
        report.seeds = [row['seed'] for row in trace]
        report.rows = trace
        report.sigma = trace[-1]['sigma']
        report.include_seeds_sigma = trace[-1]['include_seeds_sigma']
        report.timings = {'total': time.perf_counter() - start}
        return report
