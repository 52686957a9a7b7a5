"""Print z1, the cross-section and the bias constant for several bump widths.

    python3 scripts/constants_table.py 0.5 1 2
"""
import sys

from schro_renorm.constants import bias_constant, compute_z1, cross_section
from schro_renorm.mollifier import build_R_eta, make_bump_eta


def main(widths):
    print(f"{'a':>5} {'Re z1':>14} {'Im z1':>14} {'sigma':>14} {'rel. residual':>14} {'c_prime':>26}")
    for a in widths:
        eta = make_bump_eta(a)
        R = build_R_eta(eta)
        z1, sig, c = compute_z1(R), cross_section(eta), bias_constant(R)
        print(f"{a:5.3g} {z1.real:14.10f} {z1.imag:14.10f} {sig:14.10f} "
              f"{abs(2 * z1.real - sig) / (2 * z1.real):14.3g} {c.real:12.8f}{c.imag:+.8f}i")


if __name__ == "__main__":
    main([float(a) for a in sys.argv[1:]] or [0.5, 1.0, 2.0])
