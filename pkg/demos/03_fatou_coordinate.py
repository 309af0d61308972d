# coding: utf-8

# # The lift and a Fatou coordinate
#
# For small alpha the map has a second fixed point sigma close to 0.  The
# cover tau(w) = sigma / (1 - exp(-2 pi i alpha w)) sends 0 and sigma to the
# two ends of a cylinder.  The lifted map F is then almost a translation
# by 1, except near the deck translates of 0.

# In[1]:

from gmpy2 import mpc

from fatoulab import maps
from fatoulab.cf import context
from fatoulab.fatou import (FatouFrame, abel_report, dilatation_report, fatou_phi,
                            fatou_phi_inverse, near_translation_report, semiconjugacy_residual)

frame = FatouFrame(maps.quadratic(0.01), bits=128)
print("sigma =", complex(frame.sigma))


# The identity h(tau(w)) = tau(F(w)) holds up to the working precision:

# In[2]:

with context(frame.bits):
    for w in (mpc("10+3j"), mpc("45+20j")):
        print(w, float(semiconjugacy_residual(frame, w)))


# How far out do we have to stay for |F(w) - (w + 1)| < 1/4?  The radius is
# fitted from samples rather than assumed.

# In[3]:

rep = near_translation_report(frame, grid=100)
print(rep.fitted["C2"], rep.residuals)


# Phi solves the Abel equation Phi(F(w)) = Phi(w) + 1 and is normalised so
# that the critical point goes to 0.

# In[4]:

w = complex(frame.base_a + 0.4, 2.0)
print(abs(fatou_phi(frame, frame.F(w)) - fatou_phi(frame, w) - 1))
print(abs(fatou_phi(frame, fatou_phi_inverse(frame, 17.5 - 2j)) - (17.5 - 2j)))
print(abel_report(frame, points=200).residuals)
print(dilatation_report(frame).residuals)
