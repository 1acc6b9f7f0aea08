"""
The same task without convolution
=================================

A classic machine sees all 16 bits at once, so each clause must pin the
pattern to absolute pixel positions.  It still learns the task; it only
needs more epochs to get there.
"""

from convtm import Hyperparams, MulticlassModel, generate_noisy_xor

data = generate_noisy_xor(seed=1)
model = MulticlassModel(2, (4, 4), Hyperparams(clauses=40, threshold=60, specificity=3.9, seed=1))

for m in model.fit(data.X_train, data.y_train, epochs=200, X_test=data.X_test, y_test=data.y_test):
    if m.epoch % 25 == 0:
        print(f"epoch {m.epoch:3d}  test accuracy {m.test_acc:.4f}  ({m.seconds * 1000:.0f} ms)")

ev = model.evaluate(data.X_test, data.y_test)
print("confusion matrix (rows true, columns predicted):")
print(ev.confusion)
