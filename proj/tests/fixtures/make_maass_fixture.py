"""Writes maass_synthetic.coef: Hecke-consistent coefficients with the header of a level-1 even Maass form.

The Satake angles are pseudo-random, so the sequence satisfies every Hecke relation but is not the
coefficient sequence of an actual Maass form. It exercises loading and the Maass code paths only.
"""
import math
import random

N = 2000
rng = random.Random(20261018)
spf = list(range(N + 1))
for i in range(2, int(N ** 0.5) + 1):
    if spf[i] == i:
        for j in range(i * i, N + 1, i):
            if spf[j] == j:
                spf[j] = i

theta = {}
lam = [0.0] * (N + 1)
lam[1] = 1.0
for n in range(2, N + 1):
    p = spf[n]
    m, e = n, 0
    while m % p == 0:
        m //= p
        e += 1
    if p not in theta:
        theta[p] = rng.uniform(0.05, math.pi - 0.05)
    t = theta[p]
    lam_pe = math.sin((e + 1) * t) / math.sin(t)
    lam[n] = lam_pe * lam[m] if m > 1 else lam_pe

with open("maass_synthetic.coef", "w") as f:
    f.write("# synthetic Hecke-consistent sequence, see make_maass_fixture.py\n")
    f.write("#kind maass\n#ell 9.53369526135355:0\n#delta 0\n#eps_g 1\n#M 1\n#chi 1\n#eta 1:0\n")
    f.write("#n_max %d\n#tol 1e-10\n" % N)
    for n in range(1, N + 1):
        f.write("%d %r\n" % (n, lam[n]))
