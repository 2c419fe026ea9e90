"""Collects the acceptance verdicts and prints them after the run."""

import contextlib
import time

VERDICTS: list[str] = []


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record PASS or FAIL for one acceptance criterion.

    The body may set ``info["detail"]`` to append measurements to the line.
    Exceptions propagate after the verdict is recorded.
    """
    info = {"detail": ""}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException as exc:
        line = f"criterion {number:>2} FAIL  {title}: {info['detail'] or exc}"
        VERDICTS.append(line)
        print(line)
        raise
    line = (f"criterion {number:>2} PASS  {title} "
            f"({info['detail']}; {time.perf_counter() - t0:.2f}s)")
    VERDICTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
