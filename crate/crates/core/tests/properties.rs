use progtrans_core::{
    apply_bpe, augment_corpus, corpus_bleu, extract_lexicon, intersect, learn_bpe, make_ali,
    make_lex, train_model1, undo_bpe, viterbi_align, AugmentMode, Direction, ParallelCorpus,
    SegmentKind, SegmentSet, SegmentSubset, Sentence, Side, Vocabulary, CONTINUATION_MARKER,
};
use proptest::prelude::*;

fn words(max: usize) -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec("[a-eü@]{1,7}", 1..max)
}

fn subset() -> impl Strategy<Value = SegmentSubset> {
    (any::<bool>(), any::<bool>()).prop_map(|(lex, ali)| {
        let mut kinds = Vec::new();
        if lex {
            kinds.push(SegmentKind::Lex);
        }
        if ali {
            kinds.push(SegmentKind::Ali);
        }
        kinds.push(SegmentKind::Tgt);
        SegmentSubset::new(kinds).unwrap()
    })
}

proptest! {
    #[test]
    fn full_mode_emits_k_factorial_per_sentence(n in 1usize..6, subset in subset()) {
        let set = SegmentSet {
            source: Sentence::parse("a b").unwrap(),
            lex: Sentence::parse("x").unwrap(),
            ali: Sentence::default(),
            tgt: Sentence::parse("y z").unwrap(),
        };
        let corpus = vec![set; n];
        let k = subset.kinds().len();
        let fact: usize = (1..=k).product();
        prop_assert_eq!(augment_corpus(&corpus, &subset, AugmentMode::Full).len(), n * fact);
        prop_assert_eq!(augment_corpus(&corpus, &subset, AugmentMode::Simple).len(), n);
    }

    #[test]
    fn bpe_round_trips_sentences(train in words(40), sent in words(10), merges in 0usize..60) {
        prop_assume!(sent.iter().all(|w| !w.ends_with(CONTINUATION_MARKER)));
        let table = learn_bpe(&Vocabulary::from_counts(train.into_iter().map(|w| (w, 1))), merges);
        let s = Sentence::new(sent).unwrap();
        prop_assert_eq!(undo_bpe(&apply_bpe(&s, &table, None, 1)).unwrap(), s);
    }

    #[test]
    fn bleu_of_a_corpus_against_itself_is_100(corpus in proptest::collection::vec(words(8), 1..6)) {
        prop_assert_eq!(corpus_bleu(&corpus, &corpus).unwrap().score, 100.0);
    }
}

#[test]
fn in_memory_chain_on_the_toy_corpus() {
    let corpus = ParallelCorpus::parse(b"das haus\ndas buch\n", b"the house\nthe book\n").unwrap();
    let t2s_table = train_model1(&corpus, Direction::TgtToSrc, 5).unwrap();
    let s2t_table = train_model1(&corpus, Direction::SrcToTgt, 5).unwrap();
    let mut sym = Vec::new();
    let mut t2s = Vec::new();
    for (s, t) in corpus.pairs() {
        let a = viterbi_align(&t2s_table, s, t);
        let b = viterbi_align(&s2t_table, s, t);
        sym.push(intersect(&a, &b).unwrap());
        t2s.push(a);
    }
    let lexicon = extract_lexicon(&corpus, &sym).unwrap();
    assert_eq!(lexicon.get("das"), Some(("the", 2)));

    let sources: Vec<&Sentence> = corpus.side(Side::Source).collect();
    let targets: Vec<&Sentence> = corpus.side(Side::Target).collect();
    for i in 0..corpus.len() {
        let lex = make_lex(sources[i], &lexicon);
        let ali = make_ali(&lex, &t2s[i], targets[i].len()).unwrap();
        assert_eq!(&lex, targets[i]);
        assert_eq!(&ali, targets[i]);
    }
}
