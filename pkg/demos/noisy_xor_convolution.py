"""
2D Noisy XOR with a convolutional clause filter
===============================================

Every 4x4 image carries a 2x2 pattern in its upper-right corner: a diagonal
means class 1, a horizontal or vertical line class 0.  The other twelve bits
are noise, and 40% of the training labels are flipped.

A 2x2 filter with position bits finds the informative corner on its own.
"""

import numpy as np

from convtm import Hyperparams, MulticlassModel, generate_noisy_xor
from convtm.interpret import clause_to_pattern, top_clauses

data = generate_noisy_xor(n_train=2500, n_test=10000, noise_rate=0.4, seed=0)
print("train labels flipped:", int((data.y_train != data.y_train_clean).sum()))

params = Hyperparams(clauses=40, threshold=60, specificity=3.9, filter_size=2, seed=0)
model = MulticlassModel(2, (4, 4), params)

# Accuracy is measured on clean test labels after every epoch.
history = model.fit(data.X_train, data.y_train, epochs=100, X_test=data.X_test, y_test=data.y_test)
acc = np.array([h.test_acc for h in history])
for epoch in (1, 5, 10, 25, 50, 100):
    print(f"epoch {epoch:3d}  test accuracy {acc[epoch - 1]:.4f}")

# %%
# The strongest positive clauses of class 1 should describe a diagonal and
# restrict the patch position to the upper-right corner (X = 3, Y = 1 in the
# 1-based coordinates used by the report).
for j in top_clauses(model, 1, +1, 3):
    print()
    print(clause_to_pattern(model, 1, +1, j).render())
