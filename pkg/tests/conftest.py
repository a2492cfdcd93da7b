import pytest

from walkre.dataset import EntityMention, GoldRelation, Sentence

# Larsen at 0, colleagues at 16, harbour at 19.
EXAMPLE_TOKENS = (
    "Larsen was cleared of damaging a small cafe manager in 2003 "
    "and was seen with his colleagues in the harbour"
).split()


@pytest.fixture
def example_sentence() -> Sentence:
    return Sentence(
        list(EXAMPLE_TOKENS),
        [
            EntityMention("T1", 0, 1, "PER"),
            EntityMention("T2", 8, 9, "PER"),
            EntityMention("T3", 16, 17, "PER"),
            EntityMention("T4", 19, 20, "GPE"),
        ],
        [
            GoldRelation("T1", "T3", "PER-SOC"),
            GoldRelation("T3", "T4", "PHYS"),
            GoldRelation("T1", "T4", "PHYS"),
        ],
    )
