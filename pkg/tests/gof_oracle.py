"""Independent transcription of the adequacy statistics for a fitted Lomax model.

Uses 40-digit mpmath arithmetic and shares no code with the package.
Run as a script to print the reference values frozen in the tests.
"""

import csv
import sys

import mpmath as mp

mp.mp.dps = 40


def lomax_cdf(x, tau, beta):
    return 1 - (beta / (beta + x)) ** tau


def lomax_loglik(xs, tau, beta):
    return mp.fsum(mp.log(tau) + tau * mp.log(beta) - (tau + 1) * mp.log(beta + x) for x in xs)


def ks_pvalue(d, n, terms=400):
    z2 = n * d * d
    return 2 * mp.fsum((-1) ** (k - 1) * mp.exp(-2 * k * k * z2) for k in range(1, terms + 1))


def report(xs, tau, beta, k=2):
    xs = [mp.mpf(x) for x in xs]
    tau, beta = mp.mpf(tau), mp.mpf(beta)
    n = len(xs)
    u = sorted(lomax_cdf(x, tau, beta) for x in xs)
    w2 = mp.mpf(1) / (12 * n)
    for i in range(1, n + 1):
        w2 += (u[i - 1] - mp.mpf(2 * i - 1) / (2 * n)) ** 2
    s = 0
    for i in range(1, n + 1):
        s += (2 * i - 1) * (mp.log(u[i - 1]) + mp.log(1 - u[n - i]))
    a2 = -n - s / n
    ks = max(max(mp.mpf(i) / n - u[i - 1], u[i - 1] - mp.mpf(i - 1) / n) for i in range(1, n + 1))
    ll = lomax_loglik(xs, tau, beta)
    aic = 2 * k - 2 * ll
    return {
        "loglik": ll,
        "w_star": w2 * (1 + mp.mpf("0.5") / n),
        "a_star": a2 * (1 + mp.mpf("0.75") / n + mp.mpf("2.25") / n**2),
        "ks": ks,
        "ks_p": ks_pvalue(ks, n),
        "aic": aic,
        "caic": aic + mp.mpf(2 * k * (k + 1)) / (n - k - 1),
        "bic": k * mp.log(n) - 2 * ll,
        "hqic": 2 * k * mp.log(mp.log(n)) - 2 * ll,
    }


if __name__ == "__main__":
    path, tau, beta = sys.argv[1], sys.argv[2], sys.argv[3]
    with open(path, newline="") as fh:
        xs = [row["time"] for row in csv.DictReader(fh)]
    for key, val in report(xs, tau, beta).items():
        print(f"{key} = {mp.nstr(val, 17)}")
