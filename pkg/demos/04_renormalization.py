# coding: utf-8

# # Near-parabolic renormalization
#
# Points go around the cylinder until they come back to the base band.  The
# return map, read in Fatou coordinates and pushed down to a punctured disk,
# is again a map fixing 0.  Its rotation number is 1/alpha reduced to the
# nearest integer, with the sign flipped when needed.

# In[1]:

import math

from fatoulab import maps
from fatoulab.fatou import FatouFrame
from fatoulab.renorm import (reduced_inverse, renormalize, rotation_number_estimate,
                             rotation_report)

for alpha in (math.sqrt(2) - 1, 0.208, 0.24):
    frame = FatouFrame(maps.quadratic(alpha))
    R = renormalize(frame)
    est = rotation_number_estimate(R, 1e-3, 200)
    print(f"alpha={alpha:.6f}  expected {abs(reduced_inverse(alpha)):.6f}  "
          f"measured {est.value:.6f}  disk {R.validated_disk:.3g}")


# The full report also looks at the multiplier and at the return times.

# In[2]:

rep = rotation_report(FatouFrame(maps.cubic(0.24)))
print(rep.status, rep.residuals)
print(rep.fitted)
