"""
The linear-program layer
=========================

Everything above it reduces to bounded-variable linear programs.  The
reference backend is a deterministic two-phase simplex; HiGHS can be
swapped in for large programs under the same contract.
"""

from stablehh import LPBuilder, check_feasibility, solve, to_mps

# max 3a + b  s.t.  2a + b <= 10,  a >= 1,  a in [0, 4], b >= -1
builder = LPBuilder()
builder.add_variable("a", 0.0, 4.0)
builder.add_variable("b", -1.0)
builder.add_constraint("cap", [(2.0, "a"), (1.0, "b")], "<=", 10.0)
builder.add_constraint("floor", [(1.0, "a")], ">=", 1.0)
program = builder.build(objective=[(3.0, "a"), (1.0, "b")], direction="max")

for backend in ("simplex", "highs"):
    solution = solve(program, backend=backend)
    print(f"{backend:8} {solution.status}: a={solution.values['a']}, b={solution.values['b']}, "
          f"objective={solution.objective_value}, residual={solution.max_residual:.1e}")

# check_feasibility returns the largest signed violation: negative means
# slack everywhere, positive means infeasible by that amount.
print("residual at (a=4, b=2):", check_feasibility(program, {"a": 4.0, "b": 2.0}))
print("residual at (a=4, b=3):", check_feasibility(program, {"a": 4.0, "b": 3.0}))

# Fixed-format MPS export for cross-checking against external solvers.
print()
print(to_mps(program, name="DEMO"))
