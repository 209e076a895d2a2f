import csv
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def write_csv(path, X, y, label_name="label", label_map=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{i}" for i in range(X.shape[1])] + [label_name])
        for row, lab in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [label_map[lab] if label_map else int(lab)])
    return path


@pytest.fixture(scope="session")
def real_data_dir(tmp_path_factory):
    """Iris, Wine, Cancer and Digits written as CSV from the copies bundled with scikit-learn."""
    sk = pytest.importorskip("sklearn.datasets")
    root = tmp_path_factory.mktemp("real")
    for name, loader in (("iris", sk.load_iris), ("wine", sk.load_wine),
                         ("cancer", sk.load_breast_cancer), ("digits", sk.load_digits)):
        b = loader()
        write_csv(root / f"{name}.csv", b.data, b.target)
    return root


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
