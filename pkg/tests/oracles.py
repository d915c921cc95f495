"""Reference computations that share no code with the package.

Only the standard library is used; the formulas are written out longhand so a
mistake in the package cannot leak into the expected values.
"""

import math
import statistics


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def bucket(rtc, n1=40, n2=80):
    if rtc <= n1:
        return "simple"
    elif rtc <= n2:
        return "moderate"
    return "hard"


def spreadsheet(group, n1=40, n2=80, lambdas=(0.05, 0.1, 0.15), alpha=0.2, eps=1e-8):
    """group: list of (rtc, len, correct). Returns one dict per member."""
    ok_rtc = [r for r, _, c in group if c]
    ok_len = [n for _, n, c in group if c]
    if len(ok_rtc) >= 2:
        mr, sr = statistics.mean(ok_rtc), statistics.pstdev(ok_rtc)
        ml, sl = statistics.mean(ok_len), statistics.pstdev(ok_len)
    else:
        mr = ok_rtc[0] if ok_rtc else 0.0
        ml = ok_len[0] if ok_len else 0.0
        sr = sl = 0.0
    rows = []
    for rtc, n, c in group:
        b = bucket(rtc, n1, n2)
        a1 = {"simple": lambdas[0], "moderate": lambdas[1], "hard": lambdas[2]}[b]
        a2 = alpha - a1
        f_rtc = sigmoid((rtc - mr) / sr) if (len(ok_rtc) >= 2 and sr > eps) else 0.5
        f_len = sigmoid((n - ml) / sl) if (len(ok_len) >= 2 and sl > eps) else 0.5
        reward = (1 - a1 * f_rtc - a2 * f_len) if c else 0.0
        rows.append(dict(bucket=b, alpha1=a1, alpha2=a2, f_rtc=f_rtc, f_len=f_len, reward=reward))
    return rows


def rloo(rewards):
    m = len(rewards)
    return [rewards[i] - sum(rewards[j] for j in range(m) if j != i) / (m - 1) for i in range(m)]
