"""Recover a confounded network from perfect independence answers.

Ground truth: X0 -> X1, X3 -> X2, and a hidden L pointing at both X1 and
X2.  The oracle backend answers every d-separation query from the truth,
so the run shows exactly what the k-bounded search can and cannot commit
to: the latent shows up as a bidirected edge, realized in the output
network as a fresh parentless hidden node.
"""

from rkcia.algorithm import RunConfig, run
from rkcia.graphs import TrueDag, Variable
from rkcia.indep import oracle_backend

truth = TrueDag(
    [
        Variable(0, "X0", 2),
        Variable(1, "X1", 2),
        Variable(2, "X2", 2),
        Variable(3, "X3", 2),
        Variable(4, "L", 2, hidden=True),
    ],
    [(0, 1), (4, 1), (4, 2), (3, 2)],
)

result = run(RunConfig(k=1), oracle_backend(truth))

print("separating sets found:")
for pair, s in result.sepsets.items():
    print(f"  {pair}: {s}")
print("after the orientation fixpoint:", result.closure_pi)
print("after hardening circles:      ", result.poipg)
print("final mixed graph:            ", result.final_pi)
print("removal order:", result.removal_order)
print("output network edges (the reconstructed hidden cause is H_0):")
names = [v.name for v in result.dag.nodes]
for p, c in result.dag.sorted_edges():
    print(f"  {names[p]} -> {names[c]}")
