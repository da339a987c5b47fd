//! The end-to-end corpus preparation run.
//!
//! Stage order: both directional tables and Viterbi alignments, intersection,
//! lexicon, word-level `lex` and `ali`, shared BPE (learn, then apply with the
//! target subword vocabulary constraining `lex`/`ali`), augmentation. Every
//! artifact lands in the output directory and is checksummed in `MANIFEST`.

use std::path::Path;

use anyhow::{Context, Result};
use progtrans_core::{
    augment_corpus, extract_lexicon, learn_bpe, Direction, ParallelCorpus, Sentence, Side,
    Vocabulary,
};

use crate::config::PipelineConfig;
use crate::formats::{self, AugmentedPaths};
use crate::manifest::{Manifest, OutputLock, MANIFEST_FILE};
use crate::stages::{self, Segmenter};

pub const CONFIG_FILE: &str = "config.txt";
pub const TTABLE_TGT2SRC: &str = "ttable.tgt2src";
pub const TTABLE_SRC2TGT: &str = "ttable.src2tgt";
pub const ALIGN_TGT2SRC: &str = "align.tgt2src";
pub const ALIGN_SRC2TGT: &str = "align.src2tgt";
pub const ALIGN_SYM: &str = "align.sym";
pub const LEXICON: &str = "lexicon.tsv";
pub const LEX: &str = "train.lex";
pub const ALI: &str = "train.ali";
pub const CODES: &str = "bpe.codes";
pub const BPE_SRC: &str = "train.bpe.src";
pub const BPE_TGT: &str = "train.bpe.tgt";
pub const BPE_LEX: &str = "train.bpe.lex";
pub const BPE_ALI: &str = "train.bpe.ali";
pub const AUG_PREFIX: &str = "train.aug";
pub const AUG_SRC: &str = "train.aug.src";
pub const AUG_TGT: &str = "train.aug.tgt";
pub const AUG_MANIFEST: &str = "train.aug.manifest";

/// Artifacts in the order they are produced and listed in the manifest.
pub const ARTIFACTS: [&str; 18] = [
    CONFIG_FILE,
    TTABLE_TGT2SRC,
    ALIGN_TGT2SRC,
    TTABLE_SRC2TGT,
    ALIGN_SRC2TGT,
    ALIGN_SYM,
    LEXICON,
    LEX,
    ALI,
    CODES,
    BPE_SRC,
    BPE_TGT,
    BPE_LEX,
    BPE_ALI,
    AUG_SRC,
    AUG_TGT,
    AUG_MANIFEST,
    MANIFEST_FILE,
];

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().with_context(|| format!("stage {name} failed"))
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub pairs: usize,
    pub examples: usize,
    pub merges: usize,
    pub lexicon_entries: usize,
    pub manifest: Manifest,
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineSummary> {
    let (src, tgt, out) = stage("config", || config.require_paths())?;
    let _lock = stage("config", || OutputLock::acquire(out))?;
    let out = out.to_path_buf();
    let path = |name: &str| out.join(name);

    let corpus = stage("load", || Ok(formats::load_parallel(src, tgt)?))?;
    anyhow::ensure!(!corpus.is_empty(), "stage load failed: corpus is empty");
    formats::write_text(&path(CONFIG_FILE), &config.canonical())?;

    let t2s = stage("align", || {
        let (table, aligns) = stages::align(&corpus, Direction::TgtToSrc, config.iterations)?;
        formats::write_translation_table(&path(TTABLE_TGT2SRC), &table)?;
        formats::write_directional(&path(ALIGN_TGT2SRC), &aligns)?;
        Ok(aligns)
    })?;
    let s2t = stage("align", || {
        let (table, aligns) = stages::align(&corpus, Direction::SrcToTgt, config.iterations)?;
        formats::write_translation_table(&path(TTABLE_SRC2TGT), &table)?;
        formats::write_directional(&path(ALIGN_SRC2TGT), &aligns)?;
        Ok(aligns)
    })?;

    let sym = stage("symmetrize", || {
        let sym = stages::symmetrize(&t2s, &s2t)?;
        formats::write_symmetric(&path(ALIGN_SYM), &sym)?;
        Ok(sym)
    })?;

    let lexicon = stage("lexicon", || {
        let lexicon = extract_lexicon(&corpus, &sym)?;
        formats::write_lexicon(&path(LEXICON), &lexicon)?;
        Ok(lexicon)
    })?;

    let sources: Vec<Sentence> = corpus.side(Side::Source).cloned().collect();
    let targets: Vec<Sentence> = corpus.side(Side::Target).cloned().collect();
    let lex = stage("lex", || {
        let lex = stages::lex_sequences(&sources, &lexicon);
        formats::write_sentences(&path(LEX), &lex)?;
        Ok(lex)
    })?;
    let ali = stage("ali", || {
        let ali = stages::ali_sequences(&lex, &t2s, &targets)?;
        formats::write_sentences(&path(ALI), &ali)?;
        Ok(ali)
    })?;

    let codes = stage("bpe-learn", || {
        let codes = learn_bpe(&stages::joint_vocab(&corpus), config.merges);
        formats::write_merge_table(&path(CODES), &codes)?;
        Ok(codes)
    })?;

    let (bpe_src, bpe_tgt, bpe_lex, bpe_ali) = stage("bpe-apply", || {
        let plain = Segmenter::new(&codes, None, 1);
        let bpe_src = plain.segment_all(&sources);
        let bpe_tgt = plain.segment_all(&targets);
        let tgt_vocab = Vocabulary::count(&bpe_tgt);
        let filtered = Segmenter::new(&codes, Some(&tgt_vocab), config.vocab_threshold);
        let bpe_lex = filtered.segment_all(&lex);
        let bpe_ali = filtered.segment_all(&ali);
        formats::write_sentences(&path(BPE_SRC), &bpe_src)?;
        formats::write_sentences(&path(BPE_TGT), &bpe_tgt)?;
        formats::write_sentences(&path(BPE_LEX), &bpe_lex)?;
        formats::write_sentences(&path(BPE_ALI), &bpe_ali)?;
        Ok((bpe_src, bpe_tgt, bpe_lex, bpe_ali))
    })?;

    let examples = stage("augment", || {
        let sets = stages::segment_sets(&bpe_src, &bpe_lex, &bpe_ali, &bpe_tgt)?;
        let examples = augment_corpus(&sets, &config.segments, config.mode);
        formats::write_augmented(&AugmentedPaths::with_prefix(&path(AUG_PREFIX)), &examples)?;
        Ok(examples.len())
    })?;

    let manifest = stage("manifest", || {
        let mut manifest = Manifest::new(&config.canonical());
        manifest.add_input("src", src)?;
        manifest.add_input("tgt", tgt)?;
        for name in ARTIFACTS.iter().filter(|n| **n != MANIFEST_FILE) {
            manifest.add_artifact(&out, name)?;
        }
        formats::write_text(&path(MANIFEST_FILE), &manifest.to_text())?;
        Ok(manifest)
    })?;

    Ok(PipelineSummary {
        pairs: corpus.len(),
        examples,
        merges: codes.len(),
        lexicon_entries: lexicon.len(),
        manifest,
    })
}

/// Loads a corpus for a single-stage subcommand.
pub fn load_corpus(src: &Path, tgt: &Path) -> Result<ParallelCorpus> {
    stage("load", || Ok(formats::load_parallel(src, tgt)?))
}
