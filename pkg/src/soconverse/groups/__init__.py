"""Explicit matrix realizations of SO_{2l}, SO_{2n+1} and GL_n over F_q."""
