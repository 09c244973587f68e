"""Certify partial-sum bounds on sequences and convert between the two forms."""
import numpy as np

from gmetricfp import (
    amgm_tail_bound,
    check_alpha_series,
    check_lambda_sequence,
    find_alpha_certificate,
    find_lambda_certificate,
    lambda_to_alpha,
)

a = 0.4 + 0.3 * np.sin(np.arange(60)) ** 2
cert = find_alpha_certificate(a)
print(f"alpha-series certificate: lambda={cert.lam} n={cert.n_lambda}")
print("same sequence at lambda=0.3:", check_alpha_series(a, 0.3, 1).to_dict())

d = np.full(30, 0.9)
rep = check_lambda_sequence(d, 0.5, 10)
print(f"constant 0.9 distances at lambda=0.5, n=10: accepted={rep.accepted}, first bad L={rep.witness}")

d = 0.5 ** np.arange(40)
cert = find_lambda_certificate(d)
lam2, n2 = lambda_to_alpha(cert.lam, cert.n_lambda)
print(f"lambda-sequence certificate ({cert.lam}, {cert.n_lambda}) becomes alpha-series ({lam2:.4f}, {n2})")
print("  shifted form accepted:", check_alpha_series(d, lam2, n2).accepted)

for n in (5, 10, 20):
    print(f"tail bound from n={n}: {amgm_tail_bound([], cert.lam, n):.3e}")
