"""Physical constants in the library's natural units.

The formulas are written with the constants spelled out so that a different
unit system only needs these three numbers changed.
"""

HBAR = 1.0
C = 1.0
K_B = 1.0

# SI values, used only by the CLI conversion layer.
HBAR_SI = 1.054571817e-34  # J s
C_SI = 299792458.0  # m / s
K_B_SI = 1.380649e-23  # J / K
