# coding: utf-8

# # Continued fractions and the Brjuno condition
#
# Rotation numbers are handled through their nearest-integer continued
# fraction.  Every partial quotient comes with a sign, and the tail values
# alpha_n stay in [0, 1/2].  Arithmetic runs in MPFR through gmpy2, so the
# expansion is exact until the working precision is used up.

# In[1]:

import gmpy2
from gmpy2 import mpfr

from fatoulab.cf import (approximants, brjuno_ledger, classify, expand_cf, exp_linear_rule,
                         growth_ledger, product_sequence, reconstruct)

silver = expand_cf(lambda bits: gmpy2.sqrt(mpfr(2, bits)) - 1, 12)
print("quotients", silver.a)
print("signs    ", silver.eps)
print("q_n      ", approximants(silver).q)


# The golden mean is a nice contrast: its regular expansion is all ones, but
# nearest-integer rounding folds pairs of ones together.

# In[2]:

golden = expand_cf(lambda bits: (gmpy2.sqrt(mpfr(5, bits)) - 1) / 2, 8)
print(golden.a, golden.eps)
print("reconstructs to", float(reconstruct(golden)))


# # Brjuno sums and the product sequence
#
# Brjuno sums add up log q_{n+1} / q_n.  The product sequence
# alpha_1 * alpha_2^{alpha_1} * ... tends to zero exactly when that series
# diverges.  For constant type the product settles at a positive value.

# In[3]:

deep = expand_cf(lambda b: gmpy2.sqrt(mpfr(2, b)) - 1, 40)
led = brjuno_ledger(deep)
print("partial sum at depth 25:", float(led.partial_sums[25]))
print("product at depth 30:    ", float(product_sequence(deep, 30)))


# Quotients like ceil(exp(q)) cannot be stored as a number you could write
# down, so `growth_ledger` keeps everything in log space.  Here each Brjuno
# term is about 1, so the series diverges, but only linearly.  At depth 25
# the partial sum is far below 100, while the product has already collapsed.
# At these depths the two classifiers disagree.

# In[4]:

for rate in (1, 5):
    led = growth_ledger(31, rule=exp_linear_rule(rate))
    print(f"ceil(exp({rate} q))", classify(led, 25, 30))
