# Independent high-precision oracles for the frozen expected values used in
# the Rust tests. Literal transcription of the generalized gamma density and
# the two-part likelihoods, evaluated with mpmath at 50 digits.
from mpmath import mp, mpf, gamma, log, exp, sqrt, quad, inf, sign, fabs

mp.dps = 50


def gg_pdf(y, k, mu, sigma):
    k, mu, sigma, y = mpf(k), mpf(mu), mpf(sigma), mpf(y)
    eta = fabs(k) ** -2
    u = sign(k) * (log(y) - mu) / sigma
    return eta**eta / (sigma * y * gamma(eta) * sqrt(eta)) * exp(u * sqrt(eta) - eta * exp(fabs(k) * u))


def gg_moment_quad(s, k, mu, sigma):
    return quad(lambda y: y**s * gg_pdf(y, k, mu, sigma), [0, 1, 5, 20, 100, inf])


def expit(t):
    return 1 / (1 + exp(-mpf(t)))


def c_gg(sigma, k):
    sigma, k = mpf(sigma), mpf(k)
    return sigma * log(k**2) / k + log(gamma(1 / k**2 + sigma / k)) - log(gamma(1 / k**2))


Y = [0, 1, 2, 0, mpf("0.5")]
G = [1, 0, 1, 1, 0]


def mtp_ll(alpha, beta, sigma, k):
    total = mpf(0)
    for y, g in zip(Y, G):
        pi = expit(alpha[0] + alpha[1] * g)
        if y == 0:
            total += log(1 - pi)
        else:
            mu = beta[0] + beta[1] * g - log(pi) - c_gg(sigma, k)
            total += log(pi) + log(gg_pdf(y, k, mu, sigma))
    return total


def tp_ll(alpha, delta, sigma, k):
    total = mpf(0)
    for y, g in zip(Y, G):
        pi = expit(alpha[0] + alpha[1] * g)
        if y == 0:
            total += log(1 - pi)
        else:
            mu = delta[0] + delta[1] * g
            total += log(pi) + log(gg_pdf(y, k, mu, sigma))
    return total


a = [mpf("0.2"), mpf("-0.1")]
b = [mpf("0.4"), mpf("0.3")]
print("log_pdf(1.5; k=0.5, mu=0.3, sigma=0.8) =", mp.nstr(log(gg_pdf("1.5", "0.5", "0.3", "0.8")), 20))
m1 = gg_moment_quad(1, "0.5", "0.3", "0.8")
m2 = gg_moment_quad(2, "0.5", "0.3", "0.8")
print("moment1 (quad) =", mp.nstr(m1, 20))
print("moment2 (quad) =", mp.nstr(m2, 20))
print("variance (quad) =", mp.nstr(m2 - m1**2, 20))
print("mtp_ll hand k=1 sigma=1 =", mp.nstr(mtp_ll(a, b, 1, 1), 20))
print("mtp_ll hand k=0.5 sigma=0.8 =", mp.nstr(mtp_ll(a, b, mpf("0.8"), mpf("0.5")), 20))
print("tp_ll hand k=1 sigma=1 =", mp.nstr(tp_ll(a, b, 1, 1), 20))
print("tp_ll hand k=0.5 sigma=0.8 =", mp.nstr(tp_ll(a, b, mpf("0.8"), mpf("0.5")), 20))
