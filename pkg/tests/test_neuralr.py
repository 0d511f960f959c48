import pytest

from gender_rewrite.labels import parse_word_label
from gender_rewrite.rewrite import (
    NEURALR,
    EmptyTrainingSet,
    NeuralConfig,
    NeuralRewriter,
    UnknownCharacter,
    control_token,
    train_neuralr,
)
from gender_rewrite.rewrite.neuralr import EOS, Vocab

from conftest import small_neural_config, synthetic_pairs


@pytest.fixture(scope="module")
def trained():
    pairs = synthetic_pairs(50, seed=5)
    return pairs, train_neuralr(pairs, small_neural_config(), seed=2)


def test_paper_defaults():
    cfg = NeuralConfig()
    assert (cfg.beam_width, cfg.kbest) == (10, 3)


def test_source_encoding():
    vocab = Vocab("سعيد")
    label = parse_word_label("1F+B")
    ids = vocab.encode_source("سعيد", label)
    assert vocab.itos[ids[0]] == "<1F+B>" == control_token(label)
    assert vocab.decode(ids[1:-1]) == "سعيد"
    assert vocab.itos[ids[-1]] == EOS


def test_unknown_character():
    vocab = Vocab("ab")
    with pytest.raises(UnknownCharacter):
        vocab.char_ids("abc", strict=True)
    assert len(vocab.char_ids("abc")) == 3


def test_memorizes_fifty_pairs(trained):
    pairs, model = trained
    hits = sum(model.top1(p.source, p.target_label) == p.target_surface for p in pairs)
    assert hits / len(pairs) >= 0.95


def test_kbest_shape(trained):
    pairs, model = trained
    for p in pairs[:10]:
        cands = model.kbest(p.source, p.target_label)
        assert 1 <= len(cands) <= 3
        assert not cands.pass_through
        assert len(set(cands.surfaces)) == len(cands)
        assert all(c.provenance == NEURALR for c in cands)


def test_decode_is_deterministic(trained):
    pairs, model = trained
    p = pairs[0]
    assert model.beam_search(p.source, p.target_label) == model.beam_search(p.source, p.target_label)


def test_unseen_characters_still_decode(trained):
    _, model = trained
    cands = model.kbest("xyz", parse_word_label("1F+B"))
    assert 1 <= len(cands) <= 3


def test_training_is_deterministic():
    pairs = synthetic_pairs(20, seed=9)
    cfg = small_neural_config(epochs=4)
    a = train_neuralr(pairs, cfg, seed=4)
    b = train_neuralr(pairs, cfg, seed=4)
    assert a.history == b.history


def test_save_load(tmp_path, trained):
    pairs, model = trained
    model.save(tmp_path / "n.pt")
    again = NeuralRewriter.load(tmp_path / "n.pt")
    for p in pairs[:5]:
        assert again.kbest(p.source, p.target_label) == model.kbest(p.source, p.target_label)
    assert again.history == model.history


def test_empty_training_set():
    with pytest.raises(EmptyTrainingSet):
        train_neuralr([], small_neural_config())


def test_dev_set_monitoring():
    pairs = synthetic_pairs(30, seed=1)
    model = train_neuralr(pairs[:20], small_neural_config(epochs=3), seed=0, dev=pairs[20:])
    assert len(model.history) == 3
