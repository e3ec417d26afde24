import math

import pytest

from softmode.params import reference_params

# CODATA values typed in independently of softmode.constants
HBAR = 1.054571817e-34
K_B = 1.380649e-23
C = 299792458.0


def photon_number_oracle(power, wavelength=810e-9, kappa=2 * math.pi * 500e6):
    """I = 2P/(ħ ω_p κ) evaluated from scratch."""
    omega_p = 2 * math.pi * C / wavelength
    return 2 * power / (HBAR * omega_p * kappa)


def zeta_oracle(power, g_l=2 * math.pi * 215, wavelength=810e-9, kappa=2 * math.pi * 500e6):
    """ζ = 8 g_l² P / (ħ ω_p κ²)."""
    omega_p = 2 * math.pi * C / wavelength
    return 8 * g_l**2 * power / (HBAR * omega_p * kappa**2)


@pytest.fixture
def ref():
    return reference_params()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
