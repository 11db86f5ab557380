"""
Core algorithms: SCM sampling, the simplex solver, LP builders and oracles.
"""
