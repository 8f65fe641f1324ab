"""
Setup Check - Verify installation and configuration
Run this to check that dependencies, config.json and the modules are in place
"""

import json
import sys
from pathlib import Path

from colorama import Fore, Style, init as colorama_init

REQUIRED_SECTIONS = ["engine", "oracle", "verify", "bench", "greedy", "report", "logging"]


def print_header(text):
    """Print formatted header"""
    print("\n" + "="*60)
    print(f"  {text}")
    print("="*60)


def print_status(status, message):
    """Print status message"""
    symbols = {"pass": "✓", "fail": "✗", "warn": "⚠"}
    colors = {"pass": Fore.GREEN, "fail": Fore.RED, "warn": Fore.YELLOW}
    print(f"{colors.get(status, '')}{symbols.get(status, '?')}{Style.RESET_ALL} {message}")


def check_python_version():
    version = sys.version_info
    if version.major >= 3 and version.minor >= 9:
        print_status("pass", f"Python {version.major}.{version.minor}.{version.micro}")
        return True
    print_status("fail", f"Python {version.major}.{version.minor}.{version.micro} (requires 3.9+)")
    return False


def check_dependencies():
    """Check required packages"""
    packages = {
        "numpy": "numpy",
        "networkx": "networkx",
        "psutil": "psutil",
        "dotenv": "python-dotenv",
        "colorama": "colorama",
    }
    results = []
    for module, package in packages.items():
        try:
            __import__(module)
            print_status("pass", f"{package} installed")
            results.append(True)
        except ImportError:
            print_status("fail", f"{package} not installed")
            results.append(False)

    try:
        __import__("pytest")
        print_status("pass", "pytest installed (tests)")
    except ImportError:
        print_status("warn", "pytest not installed (needed for the test suite)")
    return all(results)


def check_configuration():
    """Check config.json"""
    config_path = Path(__file__).parent / "config.json"
    if not config_path.exists():
        print_status("warn", "config.json not found; built-in defaults will be used")
        return True
    try:
        with open(config_path, 'r') as f:
            config = json.load(f)
    except json.JSONDecodeError:
        print_status("fail", "config.json is invalid JSON")
        return False

    missing = [s for s in REQUIRED_SECTIONS if s not in config]
    if missing:
        print_status("warn", f"config.json missing sections (defaults apply): {missing}")
    max_width = config.get("engine", {}).get("max_width", 8)
    if max_width > 10:
        print_status("warn", f"engine.max_width={max_width}: state tables grow like 2^(w^2)")
    print_status("pass", "config.json valid")
    return True


def check_modules():
    """Check that core modules are importable"""
    modules = [
        "errors",
        "uncertain_graph",
        "edge_ordering",
        "state_engine",
        "single_target",
        "all_targets",
        "oracle",
        "generators",
        "reporting",
        "spread_core",
    ]
    sys.path.insert(0, str(Path(__file__).parent))
    results = []
    for module in modules:
        try:
            __import__(module)
            print_status("pass", f"{module}.py importable")
            results.append(True)
        except Exception as e:
            print_status("fail", f"{module}.py error: {e}")
            results.append(False)
    return all(results)


def check_smoke():
    """Diamond graph: all-targets must give sigma = 1.4375"""
    try:
        from spread_core import SpreadCore, load_config
        from uncertain_graph import SeedSet, UncertainDigraph

        graph = UncertainDigraph.from_edges(4, [(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.5), (2, 3, 0.5)])
        result = SpreadCore(load_config()).compute_spread(graph, SeedSet(frozenset({0})))
        if abs(result.sigma - 1.4375) < 1e-12:
            print_status("pass", f"diamond sigma = {result.sigma:.12g}")
            return True
        print_status("fail", f"diamond sigma = {result.sigma:.12g}, expected 1.4375")
        return False
    except Exception as e:
        print_status("fail", f"smoke run failed: {e}")
        return False


def main():
    """Run all checks"""
    colorama_init()
    print_header("Influence Spread - Installation Check")

    print("\n[1/5] Checking Python Version...")
    check1 = check_python_version()

    print("\n[2/5] Checking Dependencies...")
    check2 = check_dependencies()

    print("\n[3/5] Checking Configuration...")
    check3 = check_configuration()

    print("\n[4/5] Checking Core Modules...")
    check4 = check_modules()

    print("\n[5/5] Running Smoke Computation...")
    check5 = check_smoke() if check2 and check4 else False

    print_header("Check Summary")
    if all([check1, check2, check3, check4, check5]):
        print("\n✓ All checks passed!")
        print("\nRun: python run_spread.py spread --graph G.txt --seeds 0")
        code = 0
    else:
        print("\n✗ Some checks failed. Please fix the issues above.")
        print("\nRefer to README.md for installation instructions.")
        code = 1
    print("\n" + "="*60 + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
