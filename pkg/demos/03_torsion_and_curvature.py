# # Commutators with torsion, and curvature
#
# On a chart whose connection is not symmetric, the commutator of a 1-form
# picks up torsion terms on top of the ordinary exterior derivative.

from formlab import Chart, Connection, DifferentialForm, Metric, christoffel, classify_relation
from formlab import commutator_1form, metric_closure_report, riemann, torsion

plane = Chart(["x", "y"])
conn = Connection.from_components(plane, {("x", "x", "y"): 1})

T = torsion(conn)
print("T^x_xy =", T[0][0][1], "  T^x_yx =", T[0][1][0])

# ## y dx with and without the connection

w = DifferentialForm.one_form(plane, ["y", 0])
print("plain:  ", commutator_1form(w))
K = commutator_1form(w, conn)
print("torsion:", K)
for label, value in K.contributions[(0, 1)]:
    print("   ", label, "->", value)
print(classify_relation("psi", w, conn))

# ## Curvature of the unit sphere

sphere = Chart(["th", "ph"])
g = Metric.diagonal(sphere, ["1", "sin(th)^2"])
R = riemann(christoffel(g))
print("R^th_ph,th,ph =", R[0][1][0][1])
print(metric_closure_report(sphere, g, christoffel(g)).as_dict())
