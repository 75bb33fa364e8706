def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" and outcome != "error":
                continue
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props:
                lines.append((rep.nodeid, "PASS" if outcome == "passed" else "FAIL", props["criterion"]))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, status, text in sorted(lines):
        terminalreporter.write_line(f"{status}  {text}")
