"""
Reading the learned clauses
===========================

Train briefly, save the model, reload it, then write the heaviest clauses
per class as text and CSV.  Weighting is switched on so that clause weights
rank the clauses.
"""

import tempfile
from pathlib import Path

from convtm import Hyperparams, MulticlassModel, export_report, generate_noisy_xor, load_model, save_model

data = generate_noisy_xor(noise_rate=0.2, seed=3)
params = Hyperparams(clauses=20, threshold=30, specificity=3.9, filter_size=2, weighting=True, seed=3)
model = MulticlassModel(2, (4, 4), params)
model.fit(data.X_train, data.y_train, epochs=60)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "xor.ctm"
    save_model(model, path)
    print(f"model file: {path.stat().st_size} bytes")
    model = load_model(path)

    print(export_report(model, top_k=2, X_test=data.X_test))

    export_report(model, top_k=5, path=Path(tmp) / "report.csv", X_test=data.X_test)
    print((Path(tmp) / "report.csv").read_text())
