"""Independent verification oracles.

Each oracle checks a production computation against an independent route:
finite differences vs the adjoint gradient, the linearized systems vs the
adjoint volume integrals, manufactured solutions vs the L2 rate, and the
discrete interface energy vs the exact transition constant.
"""

from pac_topopt.verify import default_suites

for name, runner in default_suites().items():
    report = runner()
    status = "PASS" if report.passed else "FAIL"
    print(f"{name:12s} measured = {report.measured:.3e}  "
          f"bound = {report.bound:.3e}  {status}")
