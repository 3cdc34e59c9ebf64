import numpy as np
from roughsurf.geometry import ClosedFormProfile
from roughsurf.inversion import SplineBasis, invert, synthesize_measurements

profile = ClosedFormProfile('spline_bump', {'amplitude': 1.0, 'center': -0.2, 'width': 0.3})
data = synthesize_measurements(profile, [1, 3, 5], [np.pi / 3], n_f=64, delta=0.03, seed=2024)
coefficients, log = invert(data, SplineBasis(10), rho=0.8, tau=1.5)
