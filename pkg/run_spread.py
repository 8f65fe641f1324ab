"""
Influence Spread Launcher
Command-line entry point: spread | single | oracle | mc | verify | bench | greedy
"""

import argparse
import io
import logging
import sys
from pathlib import Path

from colorama import Fore, Style, init as colorama_init

# Add current directory to path
sys.path.insert(0, str(Path(__file__).parent))

from errors import SpreadError
from reporting import summary_lines
from spread_core import SpreadCore, load_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Exact reachability probabilities and influence spread on uncertain graphs"
    )
    parser.add_argument('command', choices=['spread', 'single', 'oracle', 'mc', 'verify', 'bench', 'greedy'])
    parser.add_argument('--graph', help="graph file: vertex count, then 'tail head p' lines")
    parser.add_argument('--pathdec', help="path decomposition file, one bag per line")
    parser.add_argument('--order', help="edge order file: 0-based edge indices")
    parser.add_argument('--seeds', help="comma- or space-separated seed labels")
    parser.add_argument('--target', help="target label for 'single'")
    parser.add_argument('--out', help="write the report to this file instead of stdout")
    parser.add_argument('--format', choices=['json', 'csv'], help="report format")
    parser.add_argument('--max-width', type=int, help="refuse orderings with a wider frontier")
    parser.add_argument('--rng-seed', type=int, help="seed for Monte Carlo and random corpora")
    parser.add_argument('--samples', type=int, help="Monte-Carlo sample count")
    parser.add_argument('--trials', type=int, help="random graphs for 'verify' without --graph")
    parser.add_argument('--k', type=int, help="number of seeds for 'greedy'")
    parser.add_argument('--family', help="bench family: path, cycle, ladder, random-pw")
    parser.add_argument('--sizes', help="comma-separated bench sizes (edges)")
    parser.add_argument('--dump', help="write the diagram dump for 'spread' or 'single'")
    parser.add_argument('--config', help="alternative config.json")
    return parser


def require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise SpreadError(f"'{args.command}' needs --{name.replace('_', '-')}")


def print_verdict(report, verify_config):
    """Coloured pass/fail lines for verification deltas"""
    limits = {
        'oracle': verify_config.get('tolerance', 1e-10),
        'baseline': verify_config.get('baseline_tolerance', 1e-12),
        'mc_stderrs': 3.0,
    }
    ok = True
    for key, value in report.deltas.items():
        limit = limits.get(key)
        if limit is None:
            continue
        passed = value <= limit
        ok = ok and passed
        color = Fore.GREEN if passed else Fore.RED
        mark = "✓" if passed else "✗"
        print(f"{color}{mark}{Style.RESET_ALL} max {key} delta {value:.3e} (limit {limit:g})")
    return ok


def run(args, config) -> int:
    core = SpreadCore(config)
    dump = io.StringIO() if args.dump else None
    graph = seeds = pd = order = None
    if args.graph:
        graph, seeds, pd, order = core.load_inputs(args.graph, args.seeds, args.pathdec, args.order)

    if args.command == 'spread':
        require(args, 'graph', 'seeds')
        report = core.cmd_spread(graph, seeds, pd, order, dump=dump)
    elif args.command == 'single':
        require(args, 'graph', 'seeds', 'target')
        report = core.cmd_single(graph, seeds, graph.vertex_id(args.target), pd, order, dump=dump)
    elif args.command == 'oracle':
        require(args, 'graph', 'seeds')
        report = core.cmd_oracle(graph, seeds)
    elif args.command == 'mc':
        require(args, 'graph', 'seeds')
        report = core.cmd_mc(graph, seeds, args.samples, args.rng_seed)
    elif args.command == 'verify':
        report = core.cmd_verify(graph, seeds, pd, order, args.trials, args.rng_seed, args.samples or 0)
    elif args.command == 'bench':
        sizes = [int(s) for s in args.sizes.split(',')] if args.sizes else None
        report = core.cmd_bench(args.family, sizes, args.rng_seed)
    else:
        require(args, 'graph')
        report = core.cmd_greedy(graph, args.k, pd, order)

    if dump is not None:
        Path(args.dump).write_text(dump.getvalue())

    fmt = args.format or config.get('report', {}).get('format', 'json')
    text = report.write(args.out, fmt)
    if args.out:
        for line in summary_lines(report):
            print(line)
    else:
        print(text)

    if args.command == 'verify':
        return 0 if print_verdict(report, config.get('verify', {})) else 1
    return 0


def main(argv=None) -> int:
    """Main function for the launcher"""
    args = build_parser().parse_args(argv)
    colorama_init()

    try:
        config = load_config(args.config)
    except SpreadError as e:
        print(f"{Fore.RED}Error:{Style.RESET_ALL} {e}", file=sys.stderr)
        return e.exit_code
    if args.max_width is not None:
        config['engine']['max_width'] = args.max_width
    if args.rng_seed is not None:
        config['oracle']['rng_seed'] = args.rng_seed

    log_config = config.get('logging', {})
    handlers = [logging.StreamHandler()]
    if log_config.get('file'):
        handlers.insert(0, logging.FileHandler(log_config['file']))
    logging.basicConfig(
        level=getattr(logging, log_config.get('level', 'INFO'), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )
    logger = logging.getLogger(__name__)

    try:
        return run(args, config)
    except SpreadError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"{Fore.RED}Error:{Style.RESET_ALL} {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\nInterrupted by user...")
        return 1
    except Exception as e:
        logger.error(f"Unexpected error in launcher: {e}", exc_info=True)
        print(f"\nError: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
