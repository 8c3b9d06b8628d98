def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_worker_acceptance" in nodeid and "::" in nodeid:
                name = nodeid.split("::")[-1]
                verdict = "PASS" if status == "passed" else "FAIL"
                lines.append(f"ACCEPTANCE {name}: {verdict}")
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("worker acceptance criteria:")
        for line in sorted(set(lines)):
            terminalreporter.write_line(line)
