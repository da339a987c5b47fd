//! Corpus transformations for progressive translation training.
//!
//! The crate turns a word-level parallel corpus into the two intermediate
//! target-side sequences used for multi-task training:
//!
//! * `lex`: the source translated word for word through a bilingual lexicon,
//! * `ali`: `lex` reordered so that the target-to-`lex` alignment is monotonic,
//!
//! and provides everything around them: IBM Model 1 alignment training,
//! intersection symmetrization, lexicon extraction, shared BPE, permutation
//! augmentation with control tokens, MBR consensus selection and corpus BLEU.
//!
//! Everything here is pure computation over `alloc` collections. File formats,
//! the command line and checksummed pipeline runs live in the `progtrans`
//! companion crate.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bleu;
pub mod bpe;
pub mod corpus;
pub mod ibm1;
pub mod intermediate;
pub mod mbr;
pub mod ngram;
pub mod permute;
pub mod symmetrize;

pub use bleu::{corpus_bleu, BleuError, BleuReport};
pub use bpe::{apply_bpe, learn_bpe, undo_bpe, BpeError, MergeTable, CONTINUATION_MARKER};
pub use corpus::{build_vocab, CorpusError, ParallelCorpus, Sentence, Side, Vocabulary};
pub use ibm1::{
    log_likelihood, train_model1, viterbi_align, AlignError, DirectionalAlignment, Direction,
    Model1Trainer, TranslationTable, DEFAULT_EM_ITERATIONS, NULL_WORD,
};
pub use intermediate::{make_ali, make_lex, IntermediateError, SegmentSet};
pub use mbr::{expected_utilities, mbr_select, utility, CandidatePool, MbrError, UtilityKind};
pub use permute::{
    augment_corpus, compose_target, control_token, extract_segment, parse_control_token,
    AugmentMode, AugmentedExample, Extracted, PermuteError, SegmentKind, SegmentSubset,
};
pub use symmetrize::{extract_lexicon, intersect, BilingualLexicon, OneToOneAlignment, SymmetrizeError};
