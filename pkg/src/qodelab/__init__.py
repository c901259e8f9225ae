"""ODE time stepping through simulated fixed-point quantum arithmetic and QUBO annealing."""
__version__ = "0.1.0"
