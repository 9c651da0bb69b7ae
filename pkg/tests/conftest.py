def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, _line
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in RESULTS.items():
        terminalreporter.write_line(_line(name, ok, detail))
