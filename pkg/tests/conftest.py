import numpy as np
import pytest

from centralmap.criterion import AnalysisReport, CoordinateMatrix

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}

# every AnalysisReport built during the session, as (central, orthogonal) verdicts
REPORT_AUDIT = []
_post_init = AnalysisReport.__post_init__


def _audited_post_init(self):
    _post_init(self)
    REPORT_AUDIT.append((self.central_similarity, self.orthogonal_similarity))


AnalysisReport.__post_init__ = _audited_post_init


def implication_violations():
    return sum(1 for central, orthogonal in REPORT_AUDIT if orthogonal and not central)


def record(criterion_id, passed, detail=""):
    ACCEPTANCE[criterion_id] = (bool(passed), detail)


def pytest_sessionfinish(session, exitstatus):
    if not ACCEPTANCE:
        return
    bad = implication_violations()
    ACCEPTANCE["AC2b"] = (
        bad == 0,
        f"orthogonal => central on all {len(REPORT_AUDIT)} reports built this session ({bad} violations)",
    )
    if bad:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {cid}: {detail}")


F1 = [[1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
F2 = [[1, 1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1]]
F3 = [[0, 1, 1, 0], [1, 1, 0, 0], [0, 0, 0, 1]]
F4 = [[1, 1, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 2, 0]]
HAND_PROJECTION = [[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0]]

GRID = [(3, 2), (4, 2), (4, 3), (5, 3), (6, 4)]


@pytest.fixture
def fixtures():
    return {
        name: CoordinateMatrix(np.array(a, dtype=float))
        for name, a in [("F1", F1), ("F2", F2), ("F3", F3), ("F4", F4), ("hand", HAND_PROJECTION)]
    }
