import os

# pin BLAS to one thread before numpy loads anywhere, so the acceptance
# runtime criteria are measured single-threaded
for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")
