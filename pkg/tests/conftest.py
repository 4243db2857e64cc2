from __future__ import annotations

import sys
from pathlib import Path

import pytest

from xbound.native.bindings import extract_bindings
from xbound.native.parser import parse_native
from xbound.package import link_boundary
from xbound.rules import default_rules
from xbound.script.parser import parse_module
from xbound.script.sites import find_native_call_sites

FIXTURES = Path(__file__).parent / "fixtures"
PACKAGES = FIXTURES / "packages"
VARIANTS = FIXTURES / "variants"
APPS = FIXTURES / "apps"
MICROSUITE = FIXTURES / "microsuite"
BINDINGS = FIXTURES / "bindings"
STATS_CORPUS = FIXTURES / "stats_corpus"


@pytest.fixture(scope="session")
def rules():
    return default_rules()[0]


def read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def load_package_parts(pkg: Path):
    """Parse a fixture package by hand: (native functions, bindings, modules, sites)."""
    functions, sites = [], []
    modules = []
    for f in sorted(pkg.rglob("*")):
        rel = f.relative_to(pkg).as_posix()
        if f.suffix in (".cc", ".c", ".cpp", ".h"):
            nf = parse_native(read(f), rel)
            functions.extend(nf.functions)
            sites.extend(nf.sites)
        elif f.suffix == ".js":
            modules.append(parse_module(read(f), rel))
    bindings = extract_bindings(sites)
    call_sites = [s for m in modules for s in find_native_call_sites(m, bindings)]
    return functions, bindings, modules, call_sites


def boundary_pairs(pkg: Path):
    functions, bindings, modules, call_sites = load_package_parts(pkg)
    pairs, diags = link_boundary(bindings, call_sites, functions, modules)
    return pairs, diags


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
