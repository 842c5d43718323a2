import numpy as np

#: Shared abscissae for every sampled curve: 100 points, both endpoints included.
X_GRID = np.linspace(0.0, 1.0, 100)
X_GRID.setflags(write=False)
