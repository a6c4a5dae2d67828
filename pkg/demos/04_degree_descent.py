# # Descending through degrees
#
# A relation whose right side is not closed can still close once restricted
# to a suitable surface. Its potential there gives a relation one degree
# lower, and the process repeats until a function is left.

from formlab import exterior_derivative
from formlab.integrability import demo_descent_chain

r, steps = demo_descent_chain()
print("start:", r)

for k, step in enumerate(steps, 1):
    on_pi = step.identical_on_pi
    print(f"\nstep {k}: constraints {[(c, str(v)) for c, v in step.constraints]}")
    print("  restricted:", on_pi.rhs, "on", on_pi.rhs.chart)
    print("  potential: ", on_pi.potential)
    print("  re-check d(potential) == restricted:", exterior_derivative(on_pi.potential) == on_pi.rhs)
    print("  (p, k, n) =", step.signature)
    print("  next:", step.next)
