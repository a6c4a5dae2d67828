# # Temperature as an integrating factor
#
# The heat influx of an ideal gas, dE + p dV with E = c_v T and p = R T / V,
# is a 1-form on the (T, V) plane. It is not closed, so it is not the
# differential of any state function. Dividing by T fixes that and the
# potential of the result is the entropy.

from formlab import Chart, DifferentialForm, classify_relation, exterior_derivative
from formlab import find_integrating_factor, restrict_to_pseudostructure
from formlab.corpus import thermo_case

chart = Chart(["T", "V"], params=["R", "c_v"], positive=["T", "V", "R", "c_v"])
omega = DifferentialForm.one_form(chart, ["c_v", "R*T/V"])

# ## The heat form is not closed

print("omega     =", omega)
print("d(omega)  =", exterior_derivative(omega))
print(classify_relation("E", omega))

# ## Searching for an integrating factor
# The search tries a factor depending on T alone, then on V alone.

mu = find_integrating_factor(omega)
print("mu =", mu.mu, "   S =", mu.potential)
print("d(mu*omega) =", exterior_derivative(omega.scale(mu.mu)))

# ## Along an adiabat
# On the curve V = V0 T^(-c_v/R) the heat form vanishes identically, so the
# entropy stays constant along it.

adiabat = restrict_to_pseudostructure(omega, {"V": "V0*T^(-c_v/R)"})
print("omega on the adiabat =", adiabat)

# ## The full worked case
# The corpus version also adds extra non-exact actions and checks that the
# entropy gap is made of exactly those terms.

print(thermo_case().summary())
