"""Run every built-in attack scenario and print the summary lines.

Run with ``python3 demos/attack_suite_demo.py``; pass a scenario name to see
its full report and transcript.
"""
import sys

from plsauth.harness import builtin_scenarios, get_scenario, run_scenario


def main(argv):
    if argv:
        print(run_scenario(get_scenario(argv[0])).text())
        return
    reports = [run_scenario(s) for s in builtin_scenarios()]
    for rep in reports:
        print(rep.summary_line())
    print(f"\n{sum(r.passed for r in reports)}/{len(reports)} scenarios behaved as expected; "
          f"false accepts: {sum(r.false_accepts for r in reports)}")


if __name__ == "__main__":
    main(sys.argv[1:])
