//! In-memory pipeline stages shared by the subcommands and `pipeline`.
//!
//! Per-sentence work runs on the rayon pool; results are collected in input
//! order so output never depends on the thread count.

use std::collections::{BTreeSet, HashMap};

use anyhow::{Context, Result};
use progtrans_core::bpe::apply_bpe_word;
use progtrans_core::{
    intersect, make_ali, make_lex, train_model1, viterbi_align, BilingualLexicon,
    DirectionalAlignment, Direction, MergeTable, OneToOneAlignment, ParallelCorpus, SegmentSet,
    Sentence, Side, TranslationTable, Vocabulary,
};
use rayon::prelude::*;

/// Trains a Model 1 table and Viterbi-aligns every pair with it.
pub fn align(
    corpus: &ParallelCorpus,
    direction: Direction,
    iterations: usize,
) -> Result<(TranslationTable, Vec<DirectionalAlignment>)> {
    let table = train_model1(corpus, direction, iterations)?;
    let alignments = corpus
        .pairs()
        .par_iter()
        .map(|(s, t)| viterbi_align(&table, s, t))
        .collect();
    Ok((table, alignments))
}

pub fn symmetrize(
    tgt2src: &[DirectionalAlignment],
    src2tgt: &[DirectionalAlignment],
) -> Result<Vec<OneToOneAlignment>> {
    anyhow::ensure!(
        tgt2src.len() == src2tgt.len(),
        "{} tgt2src alignments but {} src2tgt alignments",
        tgt2src.len(),
        src2tgt.len()
    );
    tgt2src
        .par_iter()
        .zip(src2tgt)
        .enumerate()
        .map(|(n, (a, b))| intersect(a, b).with_context(|| format!("sentence {}", n + 1)))
        .collect()
}

pub fn lex_sequences(sources: &[Sentence], lexicon: &BilingualLexicon) -> Vec<Sentence> {
    sources.par_iter().map(|s| make_lex(s, lexicon)).collect()
}

pub fn ali_sequences(
    lex: &[Sentence],
    tgt2src: &[DirectionalAlignment],
    targets: &[Sentence],
) -> Result<Vec<Sentence>> {
    anyhow::ensure!(
        lex.len() == tgt2src.len() && lex.len() == targets.len(),
        "{} lex lines, {} alignments, {} targets",
        lex.len(),
        tgt2src.len(),
        targets.len()
    );
    lex.par_iter()
        .zip(tgt2src)
        .zip(targets)
        .enumerate()
        .map(|(n, ((l, a), t))| make_ali(l, a, t.len()).with_context(|| format!("sentence {}", n + 1)))
        .collect()
}

/// Word counts over both sides, the input to shared BPE learning.
pub fn joint_vocab(corpus: &ParallelCorpus) -> Vocabulary {
    let mut vocab = Vocabulary::count(corpus.side(Side::Source));
    vocab.merge(&Vocabulary::count(corpus.side(Side::Target)));
    vocab
}

/// Applies a merge table to whole corpora, segmenting each distinct word once.
pub struct Segmenter<'a> {
    table: &'a MergeTable,
    vocab: Option<&'a Vocabulary>,
    threshold: u64,
}

impl<'a> Segmenter<'a> {
    pub fn new(table: &'a MergeTable, vocab: Option<&'a Vocabulary>, threshold: u64) -> Self {
        Segmenter { table, vocab, threshold }
    }

    pub fn segment_all(&self, sentences: &[Sentence]) -> Vec<Sentence> {
        let words: BTreeSet<&str> = sentences.iter().flatten().map(String::as_str).collect();
        let cache: HashMap<&str, Vec<String>> = words
            .into_par_iter()
            .map(|w| (w, apply_bpe_word(w, self.table, self.vocab, self.threshold)))
            .collect();
        sentences
            .iter()
            .map(|s| {
                let tokens: Vec<String> =
                    s.iter().flat_map(|w| cache[w.as_str()].iter().cloned()).collect();
                Sentence::new(tokens).expect("subwords of valid words are valid")
            })
            .collect()
    }
}

/// Zips the four line-aligned sequences into segment sets.
pub fn segment_sets(
    sources: &[Sentence],
    lex: &[Sentence],
    ali: &[Sentence],
    targets: &[Sentence],
) -> Result<Vec<SegmentSet>> {
    let n = sources.len();
    anyhow::ensure!(
        lex.len() == n && ali.len() == n && targets.len() == n,
        "line counts differ: source {n}, lex {}, ali {}, target {}",
        lex.len(),
        ali.len(),
        targets.len()
    );
    Ok((0..n)
        .map(|i| SegmentSet {
            source: sources[i].clone(),
            lex: lex[i].clone(),
            ali: ali[i].clone(),
            tgt: targets[i].clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use progtrans_core::{apply_bpe, learn_bpe};

    #[test]
    fn segmenter_matches_per_sentence_application() {
        let corpus = ParallelCorpus::parse(
            b"lower lowest low\nnewer wider\n",
            b"low low lower\nnew wide\n",
        )
        .unwrap();
        let table = learn_bpe(&joint_vocab(&corpus), 20);
        let sents: Vec<Sentence> = corpus.side(Side::Source).cloned().collect();
        let seg = Segmenter::new(&table, None, 1).segment_all(&sents);
        for (s, got) in sents.iter().zip(&seg) {
            assert_eq!(&apply_bpe(s, &table, None, 1), got);
        }
    }

    #[test]
    fn align_is_thread_count_independent() {
        let corpus = ParallelCorpus::parse(
            b"das haus\ndas buch\nein buch\n",
            b"the house\nthe book\na book\n",
        )
        .unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| align(&corpus, Direction::TgtToSrc, 5).unwrap().1);
        let b = four.install(|| align(&corpus, Direction::TgtToSrc, 5).unwrap().1);
        assert_eq!(a, b);
    }
}
