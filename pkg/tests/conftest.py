def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, report_line
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (passed, detail) in RESULTS.items():
        terminalreporter.write_line(report_line(name, passed, detail))
