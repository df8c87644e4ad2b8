import logging

import pytest
import yaml

from sexism_detector.cli import main

from tests.conftest import TOY_STATEMENTS

EXTRA_STATEMENTS = [
    ("men are natural leaders and women follow", 1),
    ("she should smile more at the client meeting", 1),
    ("the printer needs new toner cartridges", 0),
    ("our offsite is planned for next month", 0),
]


@pytest.fixture(autouse=True)
def restore_logging():
    """The CLI reconfigures the root logger; undo it after every test."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)


@pytest.fixture
def dataset_csv(tmp_path):
    """The 16 toy statements plus 4 more, as a raw dataset file."""
    path = tmp_path / "statements.csv"
    rows = ["text,label"] + [f'"{text}",{label}' for text, label in TOY_STATEMENTS + EXTRA_STATEMENTS]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def prepared_dir(tmp_path, dataset_csv):
    out_dir = tmp_path / "prepared"
    assert main(["prepare", "--data", str(dataset_csv), "--out-dir", str(out_dir), "--seed", "3"]) == 0
    return out_dir


@pytest.fixture
def write_config(tmp_path):
    def _write(name, document):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")
        return path
    return _write


SMALL_HYPERPARAMETERS = {
    "embedding_dim": 4,
    "hidden_size": 3,
    "attention_size": 3,
    "max_len": 12,
    "epochs": 2,
    "batch_size": 8,
    "logreg_epochs": 20,
    "gbdt_trees": 5,
    "gbdt_max_depth": 2,
}
