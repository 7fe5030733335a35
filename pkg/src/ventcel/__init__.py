"""P1 finite elements for the Laplace equation with a Ventcel face on a prism."""
