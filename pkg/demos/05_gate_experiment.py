# coding: utf-8

# # Gates and the critical orbit
#
# Make one partial quotient large and the critical orbit of P comes closer
# to the origin.  We compare the closest approach within a fixed budget
# with a gate diameter bound C * alpha_1 * alpha_2^{alpha_1} * ...

# In[1]:

from fatoulab import maps
from fatoulab.cf import regular_cf_alpha
from fatoulab.fatou import FatouFrame, fit_M
from fatoulab.renorm import critical_gate_experiment, gate_report

quotients = [[3], [3, 50], [3, 50, 10**5]]
alphas = [float(regular_cf_alpha(q)) for q in quotients]
print(alphas)


# M is a fitted constant: the largest gate diameter seen over the frames
# of the three parameters.

# In[2]:

M = fit_M([FatouFrame(maps.quadratic(a)) for a in alphas])
print("M =", M)


# In[3]:

records = []
for q in quotients:
    records += critical_gate_experiment(q, [len(q)], 10**7, M)
for r in records:
    print(r.to_dict())
print(gate_report(records).checks)
