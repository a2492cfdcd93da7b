"""Which context words does an untrained edge layer attend to?

Builds the edge layer for every pair of one sentence and prints the
attention over its context tokens. Weights are random here, so the point
is the bookkeeping: each pair has its own context, the target mentions are
left out, and the weights sum to one.
"""

import numpy as np

from walkre.config import TrainConfig
from walkre.dataset import EntityMention, GoldRelation, Sentence, build_vocab
from walkre.edge import edge_layer
from walkre.embeddings import embed_sentence
from walkre.encoder import blstm_encode
from walkre.model import WalkModel

sentence = Sentence(
    "Larsen was cleared of damaging a small cafe manager in 2003 "
    "and was seen with his colleagues in the harbour".split(),
    [
        EntityMention("T1", 0, 1, "PER"),
        EntityMention("T2", 8, 9, "PER"),
        EntityMention("T3", 16, 17, "PER"),
        EntityMention("T4", 19, 20, "GPE"),
    ],
    [GoldRelation("T1", "T3", "PER-SOC"), GoldRelation("T3", "T4", "PHYS"), GoldRelation("T1", "T4", "PHYS")],
)

cfg = TrainConfig(n_w=16, n_e=16, n_t=4, n_p=4, n_s=8, walk_length=4, seed=0)
model = WalkModel(cfg, build_vocab([sentence]))
model.params["att.q"].data *= 40  # sharpen the random scores so something stands out
[prep] = model.prepare([sentence])

encoded = blstm_encode(embed_sentence(sentence, model.vocab, model.tables), model.lstm)
out = edge_layer(prep.layout, encoded, model.tables, model.params["edge.w_s"], model.params["att.q"])
ents = sentence.entities
for p, (i, j) in enumerate(zip(prep.layout.heads, prep.layout.tails)):
    alpha = out.attention.data[p]
    top = np.argsort(alpha)[::-1][:3]
    words = ", ".join(f"{sentence.tokens[z]} {alpha[z]:.2f}" for z in top)
    print(f"{ents[i].id}->{ents[j].id}  sum {alpha.sum():.6f}  top: {words}")
