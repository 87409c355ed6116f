"""graspsim: penalty-contact rigid-body simulation for grasping studies.

Contact forces derive from the boolean-intersection volume of convex body
meshes (Kelvin-Voigt impedance on the volume and its filtered rate, plus a
Gaussian transient gain after each first contact and tanh-regularized
Coulomb friction), integrated with an adaptive Dormand-Prince RK45.
"""

__version__ = "0.1.0"
