from kypherhound.harness.closure import closure_p279star
from kypherhound.harness.generator import CorpusSpec, generate_corpus
from kypherhound.harness.oracle import OracleResult, compare_results, load_graphs, oracle_query
from kypherhound.harness.usecases import USECASES, UseCase, UseCaseResult, run_usecases

__all__ = [
    "USECASES",
    "CorpusSpec",
    "OracleResult",
    "UseCase",
    "UseCaseResult",
    "closure_p279star",
    "compare_results",
    "generate_corpus",
    "load_graphs",
    "oracle_query",
    "run_usecases",
]
