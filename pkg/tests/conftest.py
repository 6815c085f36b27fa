from pathlib import Path

import pytest

from logclone.ingest import ingest_text

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
DATA = HERE / "data"


def wrap(*methods: str, class_name: str = "Demo") -> str:
    body = "\n\n".join(methods)
    return f"public class {class_name} {{\n{body}\n}}\n"


def ingest_methods(*methods: str, file_id: str = "Demo.java", **kw):
    return ingest_text(wrap(*methods), file_id, **kw)


@pytest.fixture(scope="session")
def fib_text() -> str:
    return (FIXTURES / "Fibonacci.java").read_text()


@pytest.fixture(scope="session")
def fib_methods(fib_text):
    methods = ingest_text(fib_text, "Fibonacci.java")
    return {m.name: m for m in methods}


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
