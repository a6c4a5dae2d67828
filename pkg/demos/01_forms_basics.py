# # Exterior forms on a chart
#
# A walk through the form algebra: wedge products, the exterior derivative,
# closure, potentials and the Hodge star on small Euclidean charts.

from formlab import Chart, DifferentialForm, exterior_derivative, hodge_star, is_closed, potential

plane = Chart(["x", "y"])
dx = DifferentialForm.basis(plane, "x")
dy = DifferentialForm.basis(plane, "y")

# ## Wedge products
# Repeated differentials annihilate and swapping two of them flips the sign.

print("dx^dx =", dx ^ dx)
print("dx^dy =", dx ^ dy, "  dy^dx =", dy ^ dx)

# Coefficients multiply through, so (x dy)^(y dx) picks up the swap sign.

print("(x dy)^(y dx) =", dy.scale("x") ^ dx.scale("y"))

# ## Exterior derivative and closure

w = dy.scale("x")
print("d(x dy) =", exterior_derivative(w))
res = is_closed(w)
print("x dy closed?", res.verdict.value, " residual", res.residual)

# d applied twice always vanishes, here on a form with an opaque function.

f = DifferentialForm.scalar(plane, "f(x*y) + x^3*y")
print("d(d f) =", exterior_derivative(exterior_derivative(f)))

# ## Potentials
# A closed form with polynomial coefficients gets a potential from the
# homotopy operator. The area form dx^dy comes back as (x dy - y dx)/2.

P = potential(dx ^ dy)
print("potential(dx^dy) =", P, "  check d(P) =", exterior_derivative(P))

# ## Hodge star in three dimensions

space = Chart(["x", "y", "z"])
ex = DifferentialForm.basis(space, "x")
print("*dx =", hodge_star(ex), "  **dx =", hodge_star(hodge_star(ex)))
