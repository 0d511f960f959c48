import pytest

from gender_rewrite.corpus import (
    START,
    AlignmentError,
    Corpus,
    ParallelExample,
    RewritePair,
    Token,
    corpus_paths,
    corpus_stats,
    extend_annotations,
    extract_rewrite_pairs,
    label_violations,
    parse_corpus,
    read_sentences,
    write_corpus,
    write_sentences,
)
from gender_rewrite.labels import BB, TARGETS, GenderSlot, MalformedLabel, parse_target, parse_word_label

from toycorpus import toy_corpus

S = GenderSlot
MM, FM, MF, FF = TARGETS


def _example(columns):
    """columns: per position, (surface, coarse) for input, 1M/2M, 1F/2M, 1M/2F, 1F/2F."""
    rows = list(zip(*columns))
    seqs = [tuple(Token(w, S.parse(c) if c else None) for w, c in row) for row in rows]
    return ParallelExample(seqs[0], dict(zip(TARGETS, seqs[1:])))


def test_extend_enclitic_only():
    # أعرفكن (know you, fem. pl.) vs أعرفكم: only the enclitic varies
    ex = _example([[("أعرفكن", "2F"), ("أعرفكم", "2M"), ("أعرفكم", "2M"), ("أعرفكن", "2F"), ("أعرفكن", "2F")]])
    ext = extend_annotations(ex)
    assert ext.input[0].extended == parse_word_label("B+2F")
    assert ext.targets[MM][0].extended == parse_word_label("B+2M")
    assert not label_violations(ext)


def test_extend_stem_change():
    ex = _example([[("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F")]])
    ext = extend_annotations(ex)
    assert ext.input[0].extended == parse_word_label("1F+B")
    assert ext.targets[MF][0].extended == parse_word_label("1M+B")


def test_extend_invariant():
    ex = _example([[("البيت", "B")] * 5])
    ext = extend_annotations(ex)
    assert all(seq[0].extended == BB for seq in ext.renderings())


def test_extend_base_and_enclitic():
    # 1F base with a 2F enclitic: both slots vary
    ex = _example([[("سعيدةكن", "1F"), ("سعيدكم", "1M"), ("سعيدةكم", "1F"), ("سعيدكن", "1M"), ("سعيدةكن", "1F")]])
    ext = extend_annotations(ex)
    assert ext.input[0].extended == parse_word_label("1F+2F")
    assert ext.targets[MM][0].extended == parse_word_label("1M+2M")
    assert not label_violations(ext)


def test_toy_corpus_is_consistent(corpus):
    assert len(corpus) == 50
    assert all(not label_violations(ex) for ex in corpus)


def test_roundtrip(tmp_path, corpus):
    write_corpus(corpus, tmp_path)
    again = parse_corpus(tmp_path, "train")
    assert again == corpus


def test_one_sentence(tmp_path):
    ex = _example([[("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F")],
                   [("هنا", "B")] * 5])
    write_corpus(Corpus((ex,), "dev"), tmp_path)
    c = parse_corpus(tmp_path, "dev")
    assert len(c) == 1 and len(c.examples[0]) == 2


def test_alignment_error_names_sentence(tmp_path, corpus):
    write_corpus(corpus, tmp_path)
    path = corpus_paths(tmp_path)["1F/2M"]
    blocks = path.read_text(encoding="utf-8").split("\n\n")
    lines = blocks[3].split("\n")
    blocks[3] = "\n".join(lines[:-1])  # drop the last token of the fourth sentence
    path.write_text("\n\n".join(blocks), encoding="utf-8")
    with pytest.raises(AlignmentError) as err:
        parse_corpus(tmp_path)
    assert err.value.sentence == 3


def test_malformed_label_reports_location(tmp_path, corpus):
    write_corpus(corpus, tmp_path)
    path = corpus_paths(tmp_path)["input"]
    lines = path.read_text(encoding="utf-8").split("\n")
    cols = lines[0].split("\t")
    lines[0] = "\t".join([cols[0], "2X", "_"])
    path.write_text("\n".join(lines), encoding="utf-8")
    with pytest.raises(MalformedLabel, match=r"train\.input\.tsv:1"):
        parse_corpus(tmp_path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_corpus(tmp_path)


def test_rewrite_pairs_hand_count():
    # one 1F word: 1M/2M and 1M/2F change it, the two feminine targets do not
    ex = extend_annotations(_example([
        [("أنا", "B")] * 5,
        [("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F")],
    ]))
    pairs = extract_rewrite_pairs(Corpus((ex,)))
    assert pairs == [
        RewritePair("سعيدة", "أنا", "سعيد", parse_word_label("1M+B")),
        RewritePair("سعيدة", "أنا", "سعيد", parse_word_label("1M+B")),
    ]


def test_rewrite_pairs_start_marker():
    ex = extend_annotations(_example([
        [("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F")],
    ]))
    assert {p.prev for p in extract_rewrite_pairs(Corpus((ex,)))} == {START}


def test_rewrite_pairs_all_invariant():
    ex = extend_annotations(_example([[("هنا", "B")] * 5]))
    assert extract_rewrite_pairs(Corpus((ex,))) == []


def test_stats():
    assert corpus_stats(Corpus()).to_dict()["words"] == 0
    assert corpus_stats(Corpus()).gendered_word_fraction == 0.0
    gendered = extend_annotations(_example([
        [("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F"), ("سعيد", "1M"), ("سعيدة", "1F")],
        [("هنا", "B")] * 5,
    ]))
    plain = extend_annotations(_example([[("هنا", "B")] * 5]))
    stats = corpus_stats(Corpus((gendered, plain)))
    assert stats.gendered_sentence_fraction == 0.5
    assert stats.gendered_word_fraction == pytest.approx(1 / 3)
    assert stats.label_counts == {"B+B": 2, "1F+B": 1}


def test_token_validation():
    for bad in ["", "a b", START]:
        with pytest.raises(ValueError):
            Token(bad)


def test_missing_target_rendering():
    with pytest.raises(ValueError):
        ParallelExample((Token("x"),), {TARGETS[0]: (Token("x"),)})


def test_sentences_io(tmp_path):
    sents = [["أنا", "سعيدة"], ["هنا"]]
    write_sentences(tmp_path / "s.txt", sents)
    assert read_sentences(tmp_path / "s.txt") == sents


def test_toy_is_deterministic():
    assert toy_corpus(10, seed=3) == toy_corpus(10, seed=3)
