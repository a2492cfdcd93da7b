"""How walk aggregation mixes two-hop evidence into a pair vector.

Three entities, one-dimensional edges. The direct edge a->c is weak, but
a->b and b->c are both strong, so one doubling step lifts a->c.
"""

import numpy as np

from walkre.numerics import Tensor
from walkre.walks import aggregate_to_length, walk_aggregate

names = ["a", "b", "c"]
edges = np.zeros((3, 3, 1))
edges[0, 1] = 3.0  # a -> b
edges[1, 2] = 3.0  # b -> c
edges[0, 2] = 0.1  # a -> c, barely there
w_b = Tensor(np.eye(1))

print("direct edges")
for i in range(3):
    print("  ", "  ".join(f"{edges[i, j, 0]:5.2f}" for j in range(3)))

for beta in (1.0, 0.77, 0.5):
    out = walk_aggregate(Tensor(edges), w_b, beta).data
    print(f"\nafter one step, beta={beta}")
    for i in range(3):
        print("  ", "  ".join(f"{out[i, j, 0]:5.2f}" for j in range(3)))

# l=1 leaves the graph alone; l=4 applies the step twice
print("\nl=1 equals input:", np.array_equal(aggregate_to_length(Tensor(edges), 1, w_b, 0.77).data, edges))
four = aggregate_to_length(Tensor(edges), 4, w_b, 0.77).data
print("a->c after l=4:", round(float(four[0, 2, 0]), 4))
