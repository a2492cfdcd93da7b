"""Train a no-walk model and a walk model on a two-hop synthetic corpus.

Relations in the ``two_hop`` generator are either signalled by a trigger
word between neighbouring mentions or composed from two such relations.
The composed ones are where walks help. Takes several minutes on one core.

    python demos/synthetic_walks.py [n_train] [max_epochs]
"""

import sys
import time

from walkre.config import preset
from walkre.dataset import build_vocab
from walkre.evaluation import (
    approx_randomization,
    breakdown_by_entity_count,
    format_report,
    gold_decisions,
    micro_prf,
    report_dict,
)
from walkre.synthetic import generate_synthetic, load_generator_config
from walkre.training import train

n_train = int(sys.argv[1]) if len(sys.argv) > 1 else 500
max_epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 60

gen = load_generator_config("two_hop")
train_c = generate_synthetic(gen, n_train, seed=100)
dev_c = generate_synthetic(gen, 100, seed=101)
vocab = build_vocab(train_c + dev_c)
gold = gold_decisions(dev_c)
print(f"{len(train_c)} training sentences, {len(gold)} dev relations")

decisions = {}
for name in ("l1", "l4"):
    cfg = preset(name, n_e=20, max_epochs=max_epochs, seed=1)
    start = time.perf_counter()
    result = train(train_c, dev_c, cfg, vocab=vocab)
    decisions[name] = set(result.model.predict(dev_c))
    print(f"\n{name}: best epoch {result.best_epoch}, {time.perf_counter() - start:.0f}s")
    table = breakdown_by_entity_count(gold, decisions[name], dev_c, buckets=[(2, 4), (4, 6), (6, 9)])
    print(format_report(report_dict(micro_prf(gold, decisions[name]), table)))

p = approx_randomization(decisions["l4"], decisions["l1"], gold, iterations=10000, seed=0)
print(f"\nl4 vs l1 approximate randomization p = {p:.4f}")
