"""Prints one PASS/FAIL line per acceptance criterion after the run."""

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")

_DESCRIPTIONS = {
    1: "all-outsource revenue equals 7000 on any 100-order dataset",
    2: "revenue bounded in [0, 10000] and on-time + late == 100",
    3: "schedule decoder matches the brute-force oracle on every permutation",
    4: "10,000 random decodes feasible and above the lower bounds",
    5: "tree evolution reaches >= 47.5 on the toy environment in >= 8/10 seeds",
    6: "Bellman update reproduces the formula anchors to 1e-12",
    7: "every algorithm consumes budget 5000 exactly with a monotone trace",
    8: "GA best makespan <= random search in >= 8/10 paired seeds",
    9: "rank-sum p-values match exhaustive enumeration to 1e-12",
    10: "pruned trees replay identical actions on recorded rollouts",
    11: "benchmark artifacts byte-identical across reruns and worker counts",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            match = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not match:
                continue
            if outcome == "passed" and rep.when != "call":
                continue
            n = int(match.group(1))
            results[n] = results.get(n, True) and outcome == "passed"
    if not results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for n in sorted(results):
        verdict = "PASS" if results[n] else "FAIL"
        desc = _DESCRIPTIONS.get(n, "")
        terminalreporter.write_line(f"criterion {n:2d} {verdict}: {desc}")
