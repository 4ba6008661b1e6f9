"""
╔══════════════════════════════════════════════════════════════════════════════╗
║              MATCHMARKET TEST FIXTURES                                       ║
║                                                                              ║
║   Shared markets for all test modules:                                       ║
║   • ex1 - three bidders, two items, reserve prices 2 for the middle bidder   ║
║   • ex2 - two bidders, one item, common maximum price 5                      ║
║   • frozen_misreport - the profitable lie stored in fixtures/misreport.json  ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from instance_io import misreport_from_dict, read_document
from market_core import MarketInstance

PROJECT_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = PROJECT_ROOT / "fixtures"


@pytest.fixture
def ex1() -> MarketInstance:
    return MarketInstance.from_real_items(
        v=[[1, 0], [4, 4], [0, 1]],
        r=[[0, 0], [2, 2], [0, 0]],
    )


@pytest.fixture
def ex2() -> MarketInstance:
    return MarketInstance.from_real_items(v=[[10], [10]], m=[[5], [5]])


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def frozen_misreport():
    return misreport_from_dict(read_document(str(FIXTURES / "misreport.json")))
