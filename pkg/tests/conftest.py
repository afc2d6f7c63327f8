import numpy as np
import pytest

from glucotwin.ingest import derive_risk_labels, load_benchmark


@pytest.fixture(scope="session")
def benchmark_ds():
    return derive_risk_labels(load_benchmark())


@pytest.fixture(scope="session", autouse=True)
def warm_tree_kernel():
    # first grow_tree call JIT-compiles; keep that cost out of timed tests
    from glucotwin.models import grow_tree
    X = np.arange(20, dtype=float).reshape(10, 2)
    grow_tree(X, X[:, 0], max_depth=2)
