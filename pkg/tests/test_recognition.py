import pytest
from hypothesis import given
from hypothesis import strategies as st

from newsdebias.dataset import MbicRecord
from newsdebias.detection import Label
from newsdebias.recognition import (
    Lexicon,
    LexiconEntry,
    LexiconRecognizer,
    bio_to_ranges,
    bio_to_spans,
    build_lexicon,
    recognize,
    spans_to_bio,
    term_tokens,
    validate_bio,
)
from newsdebias.text import normalize_phrase, tokenize

HYPE = "Don't buy the pseudo-scientific hype about tornadoes and climate change"
EILISH = "Billie Eilish issues apology for mouthing an anti-Asian derogatory term in a resurfaced video."


def rec(sentence, biased, words=()):
    return MbicRecord(sentence, Label.BIASED if biased else Label.NON_BIASED, biased_words=tuple(words))


def lex(*terms, biased=1, total=1):
    return Lexicon({t: LexiconEntry(biased, total) for t in terms})


def test_empty_corpus_empty_lexicon():
    assert len(build_lexicon([])) == 0


def test_two_records_listing_hype():
    lexicon = build_lexicon([rec("Buy the hype.", True, ["hype"]), rec("More hype today.", True, ["Hype"])])
    assert lexicon.terms() == ["hype"]
    assert lexicon["hype"] == LexiconEntry(2, 2)


def test_phrase_kept_as_one_entry():
    lexicon = build_lexicon([rec(HYPE, True, ["pseudo-scientific hype"])])
    assert lexicon.terms() == ["pseudo-scientific hype"]
    assert term_tokens("pseudo-scientific hype") == ("pseudo-scientific", "hype")


def test_unlisted_occurrences_count_toward_total():
    lexicon = build_lexicon(
        [
            rec("They sold the hype.", True, ["hype"]),
            rec("The hype faded.", False),
            rec("Nothing here.", False),
        ]
    )
    entry = lexicon["hype"]
    assert (entry.count_in_biased, entry.count_total) == (1, 2)
    assert entry.score == 0.5


def test_overlong_or_punctuated_phrases_skipped():
    assert term_tokens("a b c d") is None
    assert term_tokens("well, really") is None
    assert term_tokens("  'hype'  ") == ("hype",)


def test_lexicon_invariants():
    with pytest.raises(ValueError):
        Lexicon({"": LexiconEntry(0, 1)})
    with pytest.raises(ValueError):
        Lexicon({"x": LexiconEntry(3, 2)})


def test_recognize_no_terms():
    assert recognize(lex("hype"), tokenize("A calm report on the weather.")) == []


def test_recognize_two_token_phrase():
    doc = tokenize(HYPE)
    spans = recognize(lex("pseudo-scientific hype"), doc)
    assert len(spans) == 1
    assert (spans[0].span.first_token, spans[0].span.last_token) == (3, 4)
    assert spans[0].span.surface == "pseudo-scientific hype"


def test_recognize_two_mask_headline():
    doc = tokenize(EILISH)
    spans = recognize(lex("mouthing", "derogatory term"), doc)
    assert [s.span.surface for s in spans] == ["mouthing", "derogatory term"]


def test_longest_match_wins():
    doc = tokenize(EILISH)
    spans = recognize(lex("term", "derogatory term"), doc)
    assert [s.span.surface for s in spans] == ["derogatory term"]


def test_leftmost_wins_on_equal_length_overlap():
    doc = tokenize("a b c")
    spans = recognize(lex("a b", "b c"), doc)
    assert [s.span.surface for s in spans] == ["a b"]


def test_punctuation_breaks_matches():
    assert recognize(lex("smear campaign"), tokenize("a smear, campaign")) == []


def test_case_insensitive_and_score():
    lexicon = Lexicon({"hype": LexiconEntry(3, 4)})
    spans = recognize(lexicon, tokenize("HYPE everywhere"))
    assert spans[0].score == 0.75


def test_min_score_filter():
    lexicon = Lexicon({"hype": LexiconEntry(1, 4), "lies": LexiconEntry(4, 4)})
    doc = tokenize("hype and lies")
    assert [s.span.surface for s in LexiconRecognizer(lexicon, 0.5).recognize(doc)] == ["lies"]
    assert len(LexiconRecognizer(lexicon).recognize(doc)) == 2


def test_lexicon_save_load(tmp_path):
    lexicon = Lexicon({"hype": LexiconEntry(2, 3), "derogatory term": LexiconEntry(1, 1)})
    path = tmp_path / "lex.tsv"
    lexicon.save(path)
    assert path.read_text(encoding="utf-8") == "derogatory term\t1\t1\nhype\t2\t3\n"
    assert Lexicon.load(path) == lexicon


def test_bio_examples():
    assert spans_to_bio(10, []) == ["O"] * 10
    doc = tokenize("zero one two three four five six seven eight nine")
    assert spans_to_bio(doc, [doc.span(4, 5)]) == list("OOOOBIOOOO")


def test_bio_overlap_rejected():
    doc = tokenize("a b c d")
    with pytest.raises(ValueError):
        spans_to_bio(doc, [doc.span(0, 1), doc.span(1, 2)])


def test_validate_bio():
    validate_bio(list("BIIOBO"))
    with pytest.raises(ValueError):
        validate_bio(["I"])
    with pytest.raises(ValueError):
        validate_bio(list("OI"))
    with pytest.raises(ValueError):
        validate_bio(["X"])


@st.composite
def bio_sequences(draw):
    n = draw(st.integers(0, 30))
    tags = []
    for _ in range(n):
        options = ["B", "O"] + (["I"] if tags and tags[-1] != "O" else [])
        tags.append(draw(st.sampled_from(options)))
    return tags


@given(bio_sequences())
def test_bio_round_trip(tags):
    doc = tokenize(" ".join(f"w{i}" for i in range(len(tags))))
    assert spans_to_bio(doc, bio_to_spans(doc, tags)) == tags
    assert [(s.first_token, s.last_token) for s in bio_to_spans(doc, tags)] == bio_to_ranges(tags)


words = st.sampled_from(["hype", "lies", "smear", "campaign", "the", "news", ",", "derogatory", "term", "."])
terms = st.lists(
    st.lists(st.sampled_from(["hype", "lies", "smear", "campaign", "derogatory", "term"]), min_size=1, max_size=3),
    max_size=6,
)


@given(st.lists(words, max_size=25), terms)
def test_recognize_properties(tokens, term_lists):
    lexicon = lex(*{" ".join(t) for t in term_lists})
    doc = tokenize(" ".join(tokens))
    spans = recognize(lexicon, doc)
    positions = [(s.span.first_token, s.span.last_token) for s in spans]
    assert positions == sorted(positions)
    for (_, b1), (a2, _) in zip(positions, positions[1:]):
        assert b1 < a2
    for s in spans:
        assert normalize_phrase(s.span.surface) in lexicon
        assert 0.0 <= s.score <= 1.0
    validate_bio(spans_to_bio(doc, spans))
