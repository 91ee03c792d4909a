"""Heat-flow deformations of xi functions for L-functions of the extended Selberg class.

Main entry points:

* :mod:`xideform.selberg`: spec data, F(s), xi^F(s)
* :mod:`xideform.mellin`: the kernels psi and Phi_F
* :mod:`xideform.deform`: gamma_t, J_t and the series F_t
* :mod:`xideform.xieval`: xi_t by two independent quadratures
* :mod:`xideform.zerofind`: zero counting, location and Rouche certificates
* :mod:`xideform.almostperiod`: vertical almost-periods of F_t
"""

__version__ = "0.1.0"
