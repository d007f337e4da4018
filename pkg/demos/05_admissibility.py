# python3
"""Which deviation profiles C can a singlet model legally have?

A candidate profile is specified as C = (1 + a.b)^{s+} (1 - a.b)^{s-}
G(lambda, a, b). For the model to produce genuine probabilities and
the right statistics, four conditions must hold:

    i    s+ >= 1 and s- >= 1 (otherwise the correlator leaves [-1, 1]
         near alignment)
    ii   pointwise positivity: |D| = |-a.b + C| <= 1 everywhere
    iii  zero mean: integral of G dmu = 0 at every setting pair
    iv   G must not vanish identically (that is just the quantum case)

The checker scans a settings grid plus near-boundary extremes and
returns a witness for every failed rule.
"""

import numpy as np

from singletzoo import cli
from singletzoo.admissibility import admissible
from singletzoo.models import HiddenBatch


def sampler(rng, n):
    # a scalar hidden variable, uniform on [-1, 1]
    return HiddenBatch(kind="synthetic", n=n, alpha=rng.uniform(-1.0, 1.0, n))


def show(title, report):
    print(title)
    print(f"  admissible: {report.admissible}")
    if not report.admissible:
        for f in report.failures:
            print(f"  rule {f['rule']}: {f['what']}")
    print()


# The boundary family: constant |G| = 1/2 with a zero-mean sign. The
# worst case of |D| = |c| + (1 - c^2)/2 is exactly 1, reached at
# c = +-1, so the scan accepts it with zero margin.
show("G = 0.5*sgn(alpha), s+ = s- = 1:",
     admissible(lambda lam, a, b: 0.5 * np.sign(lam.alpha), sampler,
                1.0, 1.0, seed=0))

# Doubling the amplitude breaks positivity in the interior:
# |D| = 1.25 at a.b = -+1/2, i.e. probability (1 - 1.25)/4 = -1/16.
show("G = sgn(alpha), s+ = s- = 1:",
     admissible(lambda lam, a, b: np.sign(lam.alpha), sampler,
                1.0, 1.0, seed=0))

# Sub-linear boundary exponents fail rule i, and the correlator
# overshoots near alignment even for a small amplitude, which rule ii
# catches close to the eps boundary.
show("G = 0.1*sgn(alpha), s+ = 1, s- = 0.5:",
     admissible(lambda lam, a, b: 0.1 * np.sign(lam.alpha), sampler,
                1.0, 0.5, seed=0))

# A G with a systematic offset cannot average to zero (rule iii).
show("G = 0.2 + 0.1*alpha, s+ = s- = 1:",
     admissible(lambda lam, a, b: 0.2 + 0.1 * lam.alpha, sampler,
                1.0, 1.0, seed=0))

# The same checks are reachable from the command line, with G written
# in the expression DSL over ab, ua, ub, va, vb and scalars l1..l4.
print("CLI: singletzoo admissible --g '0.5*sgn(l1)*ab^2' --splus 1 --sminus 1")
cli.main(["admissible", "--g", "0.5*sgn(l1)*ab^2",
          "--splus", "1", "--sminus", "1", "--samples", "500"])
print()

# An optional --mu density reweights l1..l4. Tilting the measure
# towards positive l1 gives sgn(l1) a nonzero mean, so the same G that
# passed above now fails the zero-mean rule.
print("CLI: ... --g '0.5*sgn(l1)' --mu '(1 + l1)/2'")
cli.main(["admissible", "--g", "0.5*sgn(l1)",
          "--splus", "1", "--sminus", "1", "--samples", "500",
          "--mu", "(1 + l1)/2"])
