import pytest

from citescope.corpus import Document, Mention, Relation4, Section


def make_doc(doc_id="d0", section_tokens=(("a", "b", "c"),), mentions=(),
             clusters=None, salient=(), relations=()):
    return Document(
        doc_id=doc_id,
        sections=tuple(Section(tokens=tuple(t)) for t in section_tokens),
        mentions=tuple(mentions),
        clusters=clusters or {},
        salient_cluster_ids=frozenset(salient),
        relations=tuple(relations),
    )


@pytest.fixture
def fixture_corpus():
    """Five small hand-built documents with known token counts and
    annotations (token counts: 8, 6, 10, 4, 12)."""
    docs = []
    docs.append(Document(
        doc_id="doc1",
        sections=(
            Section(("we", "train", "a", "CNN", "on", "MNIST")),
            Section(("accuracy", "improves")),
        ),
        mentions=(
            Mention(3, 4, "Method"),
            Mention(5, 6, "Dataset"),
            Mention(6, 7, "Metric"),
        ),
        clusters={"c_cnn": (0,), "c_mnist": (1,), "c_acc": (2,)},
        salient_cluster_ids=frozenset({"c_cnn", "c_mnist", "c_acc"}),
    ))
    docs.append(Document(
        doc_id="doc2",
        sections=(Section(("image", "classification", "with", "deep",
                           "nets", ".")),),
        mentions=(Mention(0, 2, "Task"),),
        clusters={"c_imgcls": (0,)},
        salient_cluster_ids=frozenset({"c_imgcls"}),
    ))
    docs.append(Document(
        doc_id="doc3",
        sections=(
            Section(("the", "LSTM", "model", "solves", "parsing")),
            Section(("we", "use", "F1", "on", "PTB")),
        ),
        mentions=(
            Mention(1, 3, "Method"),
            Mention(4, 5, "Task"),
            Mention(7, 8, "Metric"),
            Mention(9, 10, "Dataset"),
        ),
        clusters={"c_lstm": (0,), "c_parse": (1,), "c_f1": (2,),
                  "c_ptb": (3,)},
        salient_cluster_ids=frozenset({"c_lstm", "c_parse", "c_f1", "c_ptb"}),
        relations=(Relation4("c_parse", "c_ptb", "c_lstm", "c_f1"),),
    ))
    docs.append(Document(
        doc_id="doc4",
        sections=(Section(("nothing", "to", "see", "here")),),
    ))
    docs.append(Document(
        doc_id="doc5",
        sections=(
            Section(("BERT", "and", "GPT", "are", "methods")),
            Section(("GLUE", "benchmark", "uses", "accuracy", "as",
                     "the", "metric")),
        ),
        mentions=(
            Mention(0, 1, "Method"),
            Mention(2, 3, "Method"),
            Mention(5, 6, "Dataset"),
            Mention(8, 9, "Metric"),
        ),
        clusters={"c_bert": (0,), "c_gpt": (1,), "c_glue": (2,),
                  "c_acc5": (3,)},
        salient_cluster_ids=frozenset({"c_bert", "c_glue", "c_acc5"}),
    ))
    return docs
