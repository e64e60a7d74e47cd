"""Collects the acceptance criterion pass/fail lines for the terminal summary."""

LINES: list[str] = []


def record(line: str) -> None:
    LINES.append(line)
