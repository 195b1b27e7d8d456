import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pairwise_nf import parse_program  # noqa: E402
from pairwise_nf.pipeline import PipelineConfig, run_pipeline  # noqa: E402

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
CORPUS_NAMES = sorted(p.stem for p in CORPUS.glob("*.skel"))
# everything but the slow three-process semaphore
SMALL = [n for n in CORPUS_NAMES if n != "mutex3"]


@lru_cache(maxsize=None)
def corpus_program(name):
    return parse_program((CORPUS / f"{name}.skel").read_text(), f"{name}.skel")


@lru_cache(maxsize=None)
def pipeline(name):
    return run_pipeline(corpus_program(name), PipelineConfig())


@pytest.fixture(params=CORPUS_NAMES)
def corpus_name(request):
    return request.param


@pytest.fixture(params=SMALL)
def small_name(request):
    return request.param


ACCEPTANCE = {}


def record_acceptance(n, ok, detail):
    ACCEPTANCE[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
