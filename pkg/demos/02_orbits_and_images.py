# coding: utf-8

# # Orbits and pictures of Siegel disks
#
# P(z) = lambda z + z^2 with lambda = exp(2 pi i alpha).  For alpha = sqrt(2) - 1
# the origin sits inside a Siegel disk, and the critical orbit traces its edge.

# In[1]:

import math
from pathlib import Path

from fatoulab import maps
from fatoulab.render import RenderJob, Viewport, render_julia, render_postcritical
from fatoulab.verify import dump_orbit

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
alpha = math.sqrt(2) - 1
P = maps.quadratic(alpha)


# The first few points of the critical orbit, written as CSV:

# In[2]:

path = dump_orbit(P, maps.critical_value(P), 10, out / "critical_orbit.csv")
print(path.read_text())


# Escape time picture of the filled Julia set.  The result does not depend
# on how many threads did the work.

# In[3]:

job = RenderJob(P, Viewport(-0.4, 0, 3.2), resolution=512, max_iter=500)
print(render_julia(job, out / "julia_silver.ppm", threads=4))


# Density of the first million critical iterates.  They pile up on the
# boundary of the disk, and the origin is marked in red.

# In[4]:

print(render_postcritical(alpha, 10**6, Viewport(0, 0, 2.4), out / "postcritical_silver.ppm", 512))


# The cubic model with a critical point at -1 looks different but behaves
# the same way.

# In[5]:

job = RenderJob(maps.cubic(0.24), Viewport(-0.3, 0, 3.0), resolution=384, max_iter=400)
print(render_julia(job, out / "julia_cubic.ppm"))
